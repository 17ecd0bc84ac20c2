//! Memory access traces and their binary file format.
//!
//! File layout (little endian): magic `ECMTRACE`, `u32` version (1),
//! `u32` core count, `u32` tag count, each tag as `u16` byte length plus
//! UTF-8 bytes, then per core a `u64` event count followed by events of
//! `u8` kind (0 read, 1 write), `u16` tag index, `u32` size, `u64` address.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};

use crate::error::SimError;

pub const TRACE_MAGIC: &[u8; 8] = b"ECMTRACE";
pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessKind {
    Read,
    Write,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Access {
    pub kind: AccessKind,
    pub address: u64,
    pub size: u32,
    /// Index into the trace's tag table.
    pub tag: u16,
}

impl Access {
    pub fn read(address: u64, size: u32, tag: u16) -> Self {
        Access {
            kind: AccessKind::Read,
            address,
            size,
            tag,
        }
    }

    pub fn write(address: u64, size: u32, tag: u16) -> Self {
        Access {
            kind: AccessKind::Write,
            address,
            size,
            tag,
        }
    }

    /// Inclusive range of line numbers touched.
    pub fn lines(&self, line_bytes: u64) -> Result<std::ops::RangeInclusive<u64>, SimError> {
        let overflow = SimError::AddressOverflow {
            address: self.address,
            size: self.size,
        };
        if self.size == 0 {
            return Err(overflow);
        }
        let last = self
            .address
            .checked_add(self.size as u64 - 1)
            .ok_or(overflow)?;
        Ok(self.address / line_bytes..=last / line_bytes)
    }
}

/// Anything that can hand out per-core access streams on demand.
pub trait TraceSource: Sync {
    fn cores(&self) -> usize;
    fn tags(&self) -> Vec<String>;
    fn stream(&self, core: usize) -> Box<dyn Iterator<Item = Access> + '_>;
}

/// Fully materialized per-core event lists.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AccessTrace {
    pub tags: Vec<String>,
    pub streams: Vec<Vec<Access>>,
}

impl AccessTrace {
    pub fn new(cores: usize) -> Self {
        AccessTrace {
            tags: Vec::new(),
            streams: vec![Vec::new(); cores],
        }
    }

    /// Index of `name`, registering it if new.
    pub fn tag(&mut self, name: &str) -> u16 {
        if let Some(i) = self.tags.iter().position(|t| t == name) {
            return i as u16;
        }
        self.tags.push(name.to_string());
        (self.tags.len() - 1) as u16
    }

    pub fn push(&mut self, core: usize, access: Access) {
        if core >= self.streams.len() {
            self.streams.resize(core + 1, Vec::new());
        }
        self.streams[core].push(access);
    }

    pub fn len(&self) -> usize {
        self.streams.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Copy any source into memory.
    pub fn collect(source: &dyn TraceSource) -> Self {
        AccessTrace {
            tags: source.tags(),
            streams: (0..source.cores()).map(|c| source.stream(c).collect()).collect(),
        }
    }

    /// Events in lockstep round-robin order as `(core, access)`.
    pub fn interleaved(&self) -> Vec<(usize, Access)> {
        let mut out = Vec::with_capacity(self.len());
        let longest = self.streams.iter().map(Vec::len).max().unwrap_or(0);
        for round in 0..longest {
            for (core, s) in self.streams.iter().enumerate() {
                if let Some(a) = s.get(round) {
                    out.push((core, *a));
                }
            }
        }
        out
    }

    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(TRACE_MAGIC)?;
        w.write_u32::<LittleEndian>(TRACE_VERSION)?;
        w.write_u32::<LittleEndian>(self.streams.len() as u32)?;
        w.write_u32::<LittleEndian>(self.tags.len() as u32)?;
        for t in &self.tags {
            w.write_u16::<LittleEndian>(t.len() as u16)?;
            w.write_all(t.as_bytes())?;
        }
        for s in &self.streams {
            w.write_u64::<LittleEndian>(s.len() as u64)?;
            for a in s {
                w.write_u8(match a.kind {
                    AccessKind::Read => 0,
                    AccessKind::Write => 1,
                })?;
                w.write_u16::<LittleEndian>(a.tag)?;
                w.write_u32::<LittleEndian>(a.size)?;
                w.write_u64::<LittleEndian>(a.address)?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self, SimError> {
        let fmt = |e: std::io::Error| SimError::Format(e.to_string());
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(fmt)?;
        if &magic != TRACE_MAGIC {
            return Err(SimError::Format("bad magic".into()));
        }
        let version = r.read_u32::<LittleEndian>().map_err(fmt)?;
        if version != TRACE_VERSION {
            return Err(SimError::Format(format!("unsupported version {version}")));
        }
        let cores = r.read_u32::<LittleEndian>().map_err(fmt)? as usize;
        let ntags = r.read_u32::<LittleEndian>().map_err(fmt)? as usize;
        let mut tags = Vec::with_capacity(ntags.min(1 << 16));
        for _ in 0..ntags {
            let len = r.read_u16::<LittleEndian>().map_err(fmt)? as usize;
            let mut buf = vec![0u8; len];
            r.read_exact(&mut buf).map_err(fmt)?;
            tags.push(String::from_utf8(buf).map_err(|e| SimError::Format(e.to_string()))?);
        }
        let mut streams = Vec::with_capacity(cores.min(1 << 16));
        for _ in 0..cores {
            let n = r.read_u64::<LittleEndian>().map_err(fmt)? as usize;
            let mut s = Vec::with_capacity(n.min(1 << 24));
            for _ in 0..n {
                let kind = match r.read_u8().map_err(fmt)? {
                    0 => AccessKind::Read,
                    1 => AccessKind::Write,
                    k => return Err(SimError::Format(format!("bad access kind {k}"))),
                };
                let tag = r.read_u16::<LittleEndian>().map_err(fmt)?;
                if tag as usize >= ntags.max(1) {
                    return Err(SimError::Format(format!("tag index {tag} out of range")));
                }
                let size = r.read_u32::<LittleEndian>().map_err(fmt)?;
                let address = r.read_u64::<LittleEndian>().map_err(fmt)?;
                s.push(Access {
                    kind,
                    address,
                    size,
                    tag,
                });
            }
            streams.push(s);
        }
        Ok(AccessTrace { tags, streams })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SimError> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SimError> {
        let mut r = BufReader::new(File::open(path)?);
        Self::read_from(&mut r)
    }
}

impl TraceSource for AccessTrace {
    fn cores(&self) -> usize {
        self.streams.len()
    }

    fn tags(&self) -> Vec<String> {
        self.tags.clone()
    }

    fn stream(&self, core: usize) -> Box<dyn Iterator<Item = Access> + '_> {
        Box::new(self.streams[core].iter().copied())
    }
}

/// Places arrays at non-overlapping, 2 MiB aligned synthetic addresses.
#[derive(Debug, Clone)]
pub struct AddressMap {
    next: u64,
    pub page_bytes: u64,
}

impl Default for AddressMap {
    fn default() -> Self {
        AddressMap {
            next: PAGE_BYTES,
            page_bytes: PAGE_BYTES,
        }
    }
}

pub const PAGE_BYTES: u64 = 2 << 20;

impl AddressMap {
    /// Base address for an array of `bytes` bytes.
    pub fn alloc(&mut self, bytes: u64) -> u64 {
        let base = self.next;
        self.next = (base + bytes.max(1)).div_ceil(self.page_bytes) * self.page_bytes;
        base
    }
}
