//! Minimal ZIP container support: enough to read wheels and zip sdists and to
//! write small stored/deflated archives for fixtures.
//!
//! ZIP64 and encrypted entries are rejected.

use std::io::{Read, Write};

use flate2::read::DeflateDecoder;
use flate2::write::DeflateEncoder;
use flate2::{Compression, Crc};

const LOCAL_HEADER_SIG: u32 = 0x0403_4b50;
const CENTRAL_HEADER_SIG: u32 = 0x0201_4b50;
const END_OF_CENTRAL_SIG: u32 = 0x0605_4b50;

#[derive(Debug, thiserror::Error)]
pub enum ZipError {
    #[error("zip: {0}")]
    Malformed(&'static str),
    #[error("zip: unsupported compression method {0}")]
    UnsupportedMethod(u16),
    #[error("zip: crc mismatch for `{0}`")]
    CrcMismatch(String),
    #[error("zip: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone)]
pub struct ZipEntry {
    pub name: String,
    pub method: u16,
    pub crc32: u32,
    pub compressed_size: u64,
    pub uncompressed_size: u64,
    pub is_dir: bool,
    pub is_symlink: bool,
    local_header_offset: u64,
}

pub struct ZipReader<'a> {
    bytes: &'a [u8],
    entries: Vec<ZipEntry>,
}

fn u16_at(b: &[u8], at: usize) -> Result<u16, ZipError> {
    b.get(at..at + 2)
        .map(|s| u16::from_le_bytes([s[0], s[1]]))
        .ok_or(ZipError::Malformed("truncated record"))
}

fn u32_at(b: &[u8], at: usize) -> Result<u32, ZipError> {
    b.get(at..at + 4)
        .map(|s| u32::from_le_bytes([s[0], s[1], s[2], s[3]]))
        .ok_or(ZipError::Malformed("truncated record"))
}

impl<'a> ZipReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Result<Self, ZipError> {
        let eocd = find_end_of_central(bytes)?;
        let disk_entries = u16_at(bytes, eocd + 10)? as usize;
        let cd_size = u32_at(bytes, eocd + 12)? as usize;
        let cd_offset = u32_at(bytes, eocd + 16)? as usize;
        if cd_offset == 0xffff_ffff || disk_entries == 0xffff {
            return Err(ZipError::Malformed("zip64 archives are not supported"));
        }
        if cd_offset.checked_add(cd_size).is_none_or(|end| end > bytes.len()) {
            return Err(ZipError::Malformed("central directory out of bounds"));
        }

        let mut entries = Vec::with_capacity(disk_entries);
        let mut at = cd_offset;
        for _ in 0..disk_entries {
            if u32_at(bytes, at)? != CENTRAL_HEADER_SIG {
                return Err(ZipError::Malformed("bad central directory signature"));
            }
            let made_by = u16_at(bytes, at + 4)?;
            let flags = u16_at(bytes, at + 8)?;
            let method = u16_at(bytes, at + 10)?;
            let crc32 = u32_at(bytes, at + 16)?;
            let compressed_size = u32_at(bytes, at + 20)? as u64;
            let uncompressed_size = u32_at(bytes, at + 24)? as u64;
            let name_len = u16_at(bytes, at + 28)? as usize;
            let extra_len = u16_at(bytes, at + 30)? as usize;
            let comment_len = u16_at(bytes, at + 32)? as usize;
            let external_attrs = u32_at(bytes, at + 38)?;
            let local_header_offset = u32_at(bytes, at + 42)? as u64;
            let name_bytes = bytes
                .get(at + 46..at + 46 + name_len)
                .ok_or(ZipError::Malformed("truncated file name"))?;
            if flags & 0x1 != 0 {
                return Err(ZipError::Malformed("encrypted entries are not supported"));
            }
            let name = String::from_utf8_lossy(name_bytes).into_owned();
            // Unix host: high 16 bits of the external attributes hold st_mode.
            let unix_mode = if made_by >> 8 == 3 { external_attrs >> 16 } else { 0 };
            entries.push(ZipEntry {
                is_dir: name.ends_with('/'),
                is_symlink: unix_mode & 0o170000 == 0o120000,
                name,
                method,
                crc32,
                compressed_size,
                uncompressed_size,
                local_header_offset,
            });
            at += 46 + name_len + extra_len + comment_len;
        }
        Ok(ZipReader { bytes, entries })
    }

    pub fn entries(&self) -> &[ZipEntry] {
        &self.entries
    }

    /// Returns a reader over the decompressed contents of `entry`.
    pub fn open(&self, entry: &ZipEntry) -> Result<Box<dyn Read + 'a>, ZipError> {
        let at = entry.local_header_offset as usize;
        if u32_at(self.bytes, at)? != LOCAL_HEADER_SIG {
            return Err(ZipError::Malformed("bad local header signature"));
        }
        let name_len = u16_at(self.bytes, at + 26)? as usize;
        let extra_len = u16_at(self.bytes, at + 28)? as usize;
        let start = at + 30 + name_len + extra_len;
        let end = start
            .checked_add(entry.compressed_size as usize)
            .ok_or(ZipError::Malformed("entry size overflow"))?;
        let data = self
            .bytes
            .get(start..end)
            .ok_or(ZipError::Malformed("entry data out of bounds"))?;
        match entry.method {
            0 => Ok(Box::new(data)),
            8 => Ok(Box::new(DeflateDecoder::new(data))),
            m => Err(ZipError::UnsupportedMethod(m)),
        }
    }

    /// Checks a fully decompressed entry against its recorded checksum.
    pub fn verify(entry: &ZipEntry, contents: &[u8]) -> Result<(), ZipError> {
        let mut crc = Crc::new();
        crc.update(contents);
        if crc.sum() != entry.crc32 {
            return Err(ZipError::CrcMismatch(entry.name.clone()));
        }
        Ok(())
    }
}

fn find_end_of_central(bytes: &[u8]) -> Result<usize, ZipError> {
    if bytes.len() < 22 {
        return Err(ZipError::Malformed("too short for a zip archive"));
    }
    let lowest = bytes.len().saturating_sub(22 + u16::MAX as usize);
    (lowest..=bytes.len() - 22)
        .rev()
        .find(|&i| u32_at(bytes, i).ok() == Some(END_OF_CENTRAL_SIG))
        .ok_or(ZipError::Malformed("end of central directory not found"))
}

/// Writes an in-memory ZIP archive. Used to build wheel-style fixtures.
#[derive(Default)]
pub struct ZipWriter {
    out: Vec<u8>,
    central: Vec<u8>,
    count: u16,
}

impl ZipWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, contents: &[u8], deflate: bool) -> std::io::Result<()> {
        let mut crc = Crc::new();
        crc.update(contents);
        let (method, data) = if deflate {
            let mut enc = DeflateEncoder::new(Vec::new(), Compression::default());
            enc.write_all(contents)?;
            (8u16, enc.finish()?)
        } else {
            (0u16, contents.to_vec())
        };
        let offset = self.out.len() as u32;
        let name_bytes = name.as_bytes();

        let mut local = Vec::with_capacity(30 + name_bytes.len());
        local.extend_from_slice(&LOCAL_HEADER_SIG.to_le_bytes());
        local.extend_from_slice(&20u16.to_le_bytes());
        local.extend_from_slice(&0u16.to_le_bytes());
        local.extend_from_slice(&method.to_le_bytes());
        local.extend_from_slice(&0u32.to_le_bytes()); // dos time + date
        local.extend_from_slice(&crc.sum().to_le_bytes());
        local.extend_from_slice(&(data.len() as u32).to_le_bytes());
        local.extend_from_slice(&(contents.len() as u32).to_le_bytes());
        local.extend_from_slice(&(name_bytes.len() as u16).to_le_bytes());
        local.extend_from_slice(&0u16.to_le_bytes());
        local.extend_from_slice(name_bytes);
        self.out.extend_from_slice(&local);
        self.out.extend_from_slice(&data);

        let c = &mut self.central;
        c.extend_from_slice(&CENTRAL_HEADER_SIG.to_le_bytes());
        c.extend_from_slice(&(3u16 << 8 | 20).to_le_bytes());
        c.extend_from_slice(&20u16.to_le_bytes());
        c.extend_from_slice(&0u16.to_le_bytes());
        c.extend_from_slice(&method.to_le_bytes());
        c.extend_from_slice(&0u32.to_le_bytes());
        c.extend_from_slice(&crc.sum().to_le_bytes());
        c.extend_from_slice(&(data.len() as u32).to_le_bytes());
        c.extend_from_slice(&(contents.len() as u32).to_le_bytes());
        c.extend_from_slice(&(name_bytes.len() as u16).to_le_bytes());
        c.extend_from_slice(&[0u8; 8]); // extra len, comment len, disk, internal attrs
        c.extend_from_slice(&((0o100644u32) << 16).to_le_bytes());
        c.extend_from_slice(&offset.to_le_bytes());
        c.extend_from_slice(name_bytes);
        self.count += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Vec<u8> {
        let cd_offset = self.out.len() as u32;
        let cd_size = self.central.len() as u32;
        self.out.extend_from_slice(&self.central);
        self.out.extend_from_slice(&END_OF_CENTRAL_SIG.to_le_bytes());
        self.out.extend_from_slice(&[0u8; 4]);
        self.out.extend_from_slice(&self.count.to_le_bytes());
        self.out.extend_from_slice(&self.count.to_le_bytes());
        self.out.extend_from_slice(&cd_size.to_le_bytes());
        self.out.extend_from_slice(&cd_offset.to_le_bytes());
        self.out.extend_from_slice(&0u16.to_le_bytes());
        self.out
    }
}
