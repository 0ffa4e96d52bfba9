//! Binary timetag stream format.
//!
//! Little-endian layout, fixed stride for stream appends and memory maps:
//!
//! ```text
//! header (24 bytes): magic "QTAG" | u16 version=1 | u16 user id
//!                    | u32 channel count | u64 resolution_ps | u32 reserved
//! record (12 bytes): u64 timestamp_ps | u16 channel | u16 flags=0
//! ```
//!
//! Records are sorted by timestamp; per channel the timestamps are strictly
//! increasing.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::Error;
use crate::Result;

pub const MAGIC: [u8; 4] = *b"QTAG";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 24;
pub const RECORD_LEN: usize = 12;

/// One detector click.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Tag {
    pub timestamp_ps: u64,
    pub channel: u16,
}

/// A user's timetag stream.
#[derive(Debug, Clone, PartialEq)]
pub struct TagStream {
    pub user_id: u16,
    pub channel_count: u32,
    pub resolution_ps: u64,
    pub tags: Vec<Tag>,
}

impl TagStream {
    pub fn new(user_id: u16, channel_count: u32) -> Self {
        TagStream { user_id, channel_count, resolution_ps: 1, tags: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    /// Duration covered by the stream in picoseconds (first to last tag).
    pub fn span_ps(&self) -> u64 {
        match (self.tags.first(), self.tags.last()) {
            (Some(a), Some(b)) => b.timestamp_ps - a.timestamp_ps,
            _ => 0,
        }
    }

    /// Tags of one channel.
    pub fn channel_tags(&self, channel: u16) -> impl Iterator<Item = &Tag> {
        self.tags.iter().filter(move |t| t.channel == channel)
    }

    /// Check the format invariants: known channels, global timestamp order,
    /// per-channel strict monotonicity is not required on ingest (hardware
    /// may merge equal stamps) but non-decreasing per channel is.
    pub fn validate(&self) -> Result<()> {
        let mut last_global = 0u64;
        let mut last_per_channel = vec![0u64; self.channel_count as usize];
        let mut seen = vec![false; self.channel_count as usize];
        for (i, t) in self.tags.iter().enumerate() {
            if t.channel as u32 >= self.channel_count {
                return Err(Error::TagFormat(format!(
                    "record {i}: channel {} outside map of {} channels",
                    t.channel, self.channel_count
                )));
            }
            if t.timestamp_ps < last_global {
                return Err(Error::TagFormat(format!("record {i}: timestamps not sorted")));
            }
            last_global = t.timestamp_ps;
            let c = t.channel as usize;
            if seen[c] && t.timestamp_ps < last_per_channel[c] {
                return Err(Error::TagFormat(format!(
                    "record {i}: channel {} timestamps decrease",
                    t.channel
                )));
            }
            seen[c] = true;
            last_per_channel[c] = t.timestamp_ps;
        }
        Ok(())
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&self.user_id.to_le_bytes())?;
        w.write_all(&self.channel_count.to_le_bytes())?;
        w.write_all(&self.resolution_ps.to_le_bytes())?;
        w.write_all(&0u32.to_le_bytes())?;
        for t in &self.tags {
            w.write_all(&t.timestamp_ps.to_le_bytes())?;
            w.write_all(&t.channel.to_le_bytes())?;
            w.write_all(&0u16.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn write_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header)
            .map_err(|e| Error::TagFormat(format!("short header: {e}")))?;
        if header[0..4] != MAGIC {
            return Err(Error::TagFormat("bad magic".into()));
        }
        let version = u16::from_le_bytes([header[4], header[5]]);
        if version != VERSION {
            return Err(Error::TagFormat(format!("unsupported version {version}")));
        }
        let user_id = u16::from_le_bytes([header[6], header[7]]);
        let channel_count = u32::from_le_bytes([header[8], header[9], header[10], header[11]]);
        let resolution_ps = u64::from_le_bytes(header[12..20].try_into().unwrap());

        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() % RECORD_LEN != 0 {
            return Err(Error::TagFormat(format!(
                "body length {} not a multiple of the record stride",
                body.len()
            )));
        }
        let mut tags = Vec::with_capacity(body.len() / RECORD_LEN);
        for rec in body.chunks_exact(RECORD_LEN) {
            tags.push(Tag {
                timestamp_ps: u64::from_le_bytes(rec[0..8].try_into().unwrap()),
                channel: u16::from_le_bytes(rec[8..10].try_into().unwrap()),
            });
        }
        let stream = TagStream { user_id, channel_count, resolution_ps, tags };
        stream.validate()?;
        Ok(stream)
    }

    pub fn read_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TagStream {
        TagStream {
            user_id: 1,
            channel_count: 2,
            resolution_ps: 1,
            tags: vec![
                Tag { timestamp_ps: 100, channel: 0 },
                Tag { timestamp_ps: 220, channel: 1 },
                Tag { timestamp_ps: 500, channel: 0 },
            ],
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let s = sample();
        let mut buf = Vec::new();
        s.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 3 * RECORD_LEN);
        assert_eq!(&buf[0..4], b"QTAG");
        let back = TagStream::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, s);
        let mut buf2 = Vec::new();
        back.write_to(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn rejects_bad_magic_and_version() {
        let mut buf = Vec::new();
        sample().write_to(&mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(TagStream::read_from(bad.as_slice()).is_err());
        let mut bad = buf.clone();
        bad[4] = 9;
        assert!(TagStream::read_from(bad.as_slice()).is_err());
        let mut truncated = buf.clone();
        truncated.truncate(HEADER_LEN + RECORD_LEN + 3);
        assert!(TagStream::read_from(truncated.as_slice()).is_err());
    }

    #[test]
    fn rejects_unknown_channel_and_disorder() {
        let mut s = sample();
        s.tags[1].channel = 7;
        assert!(s.validate().is_err());
        let mut s = sample();
        s.tags[2].timestamp_ps = 10;
        assert!(s.validate().is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("alice.qtag");
        sample().write_path(&path).unwrap();
        assert_eq!(TagStream::read_path(&path).unwrap(), sample());
    }
}
