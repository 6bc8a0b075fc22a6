//! Adapter for an external sandboxed-install runner.
//!
//! The toolkit does not build sandboxes. A runner is any command that
//! installs one archive under isolation and emits an strace log. It is
//! configured as an argument template and is off unless configured.
//!
//! Placeholders: `{archive}`, `{workdir}`, `{timeout}`, `{network_policy}`,
//! `{writable_roots}` (colon separated) and `{log}`. Without `{log}` the
//! runner's stdout is taken as the log. Exit status 3 means the runner
//! detected a policy breach; its stderr is reported.

use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::TraceError;
use crate::corpus::PackageRef;

pub const ISOLATION_VIOLATION_EXIT: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetworkPolicy {
    #[default]
    Deny,
    AllowLoopback,
    Allow,
}

impl NetworkPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            NetworkPolicy::Deny => "deny",
            NetworkPolicy::AllowLoopback => "allow-loopback",
            NetworkPolicy::Allow => "allow",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SandboxRunSpec {
    pub package: PackageRef,
    pub timeout_secs: u64,
    pub network_policy: NetworkPolicy,
    pub writable_roots: Vec<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunnerConfig {
    /// Program and arguments; empty means no runner.
    #[serde(default)]
    pub command: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub log_path: PathBuf,
    pub exit_code: Option<i32>,
}

fn render(arg: &str, spec: &SandboxRunSpec, workdir: &Path, log: &Path) -> String {
    let roots: Vec<String> = spec.writable_roots.iter().map(|p| p.display().to_string()).collect();
    arg.replace("{archive}", &spec.package.archive_path.display().to_string())
        .replace("{workdir}", &workdir.display().to_string())
        .replace("{timeout}", &spec.timeout_secs.to_string())
        .replace("{network_policy}", spec.network_policy.as_str())
        .replace("{writable_roots}", &roots.join(":"))
        .replace("{log}", &log.display().to_string())
}

/// Runs the configured runner for one package, writing the log under
/// `workdir`. On timeout the runner is killed and the partial log path is
/// carried in the error.
pub fn run_sandboxed_install(spec: &SandboxRunSpec, runner: &RunnerConfig, workdir: &Path) -> Result<RunOutcome, TraceError> {
    if runner.command.is_empty() {
        return Err(TraceError::RunnerUnavailable);
    }
    if spec.timeout_secs == 0 {
        return Err(TraceError::RunnerFailed("timeout must be positive".into()));
    }
    fs::create_dir_all(workdir)?;
    let log_path = workdir.join("trace.log");
    let stderr_path = workdir.join("runner.stderr");
    let uses_log_arg = runner.command.iter().any(|a| a.contains("{log}"));
    let args: Vec<String> = runner.command.iter().map(|a| render(a, spec, workdir, &log_path)).collect();

    let mut cmd = Command::new(&args[0]);
    cmd.args(&args[1..]).current_dir(workdir).stdin(Stdio::null()).stderr(File::create(&stderr_path)?);
    if uses_log_arg {
        cmd.stdout(Stdio::null());
    } else {
        cmd.stdout(File::create(&log_path)?);
    }
    let mut child = cmd.spawn().map_err(|e| TraceError::RunnerFailed(format!("{}: {e}", args[0])))?;

    let deadline = Instant::now() + Duration::from_secs(spec.timeout_secs);
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if Instant::now() >= deadline {
            let _ = child.kill();
            let _ = child.wait();
            if !log_path.exists() {
                File::create(&log_path)?;
            }
            return Err(TraceError::Timeout { seconds: spec.timeout_secs, partial_log: log_path.display().to_string() });
        }
        std::thread::sleep(Duration::from_millis(20));
    };
    if status.code() == Some(ISOLATION_VIOLATION_EXIT) {
        let detail = fs::read_to_string(&stderr_path).unwrap_or_default();
        return Err(TraceError::IsolationViolation(detail.trim().to_string()));
    }
    if !log_path.exists() {
        return Err(TraceError::RunnerFailed("runner produced no log".into()));
    }
    Ok(RunOutcome { log_path, exit_code: status.code() })
}
