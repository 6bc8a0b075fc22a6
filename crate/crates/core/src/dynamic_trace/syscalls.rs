//! System call categories.

use crate::types::Category;

const FILE: &[&str] = &[
    "open", "openat", "openat2", "creat", "read", "readv", "pread64", "preadv", "preadv2", "write", "writev",
    "pwrite64", "pwritev", "pwritev2", "close", "unlink", "unlinkat", "rename", "renameat", "renameat2", "mkdir",
    "mkdirat", "rmdir", "chmod", "fchmod", "fchmodat", "chown", "fchown", "lchown", "fchownat", "stat", "fstat",
    "lstat", "newfstatat", "statx", "access", "faccessat", "faccessat2", "readlink", "readlinkat", "symlink",
    "symlinkat", "link", "linkat", "truncate", "ftruncate", "getdents", "getdents64", "lseek", "sendfile",
    "copy_file_range", "fsync", "fdatasync", "utimensat", "chdir", "fchdir", "mknod", "mknodat", "getcwd",
    "memfd_create",
];

const NETWORK: &[&str] = &[
    "socket", "socketpair", "connect", "accept", "accept4", "bind", "listen", "sendto", "recvfrom", "sendmsg",
    "recvmsg", "sendmmsg", "recvmmsg", "getsockopt", "setsockopt", "getsockname", "getpeername", "shutdown",
    "getaddrinfo", "gethostbyname",
];

const PROCESS: &[&str] = &[
    "fork", "vfork", "clone", "clone3", "execve", "execveat", "kill", "tkill", "tgkill", "wait4", "waitid",
    "exit", "exit_group", "ptrace", "setuid", "setgid", "setreuid", "setresuid", "setsid", "prctl", "pidfd_open",
];

pub fn category(name: &str) -> Option<Category> {
    if FILE.contains(&name) {
        Some(Category::File)
    } else if NETWORK.contains(&name) {
        Some(Category::Network)
    } else if PROCESS.contains(&name) {
        Some(Category::Process)
    } else {
        None
    }
}

/// Every (name, category) in the table, for documentation and export.
pub fn table() -> impl Iterator<Item = (&'static str, Category)> {
    FILE.iter()
        .map(|&n| (n, Category::File))
        .chain(NETWORK.iter().map(|&n| (n, Category::Network)))
        .chain(PROCESS.iter().map(|&n| (n, Category::Process)))
}
