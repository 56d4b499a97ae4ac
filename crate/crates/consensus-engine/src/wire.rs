//! Canonical byte layouts used for signing and digests.
//!
//! The encoding is fixed so every replica derives identical bytes for
//! identical messages, across runs and platforms:
//!
//! * integers are little-endian and fixed-width (`u8`, `u32`, `u64`);
//! * every message starts with a one-byte domain tag;
//! * lists are a `u32` element count followed by the elements;
//! * options are a presence byte (`0`/`1`) followed by the payload;
//! * field order is exactly the struct declaration order.
//!
//! Domain tags: `0x01` vote extension (defined in the election crate),
//! `0x02` vote, `0x03` proposal, `0x04` view change, `0x05` batch,
//! `0x06` quorum certificate.

pub const TAG_VOTE: u8 = 0x02;
pub const TAG_PROPOSAL: u8 = 0x03;
pub const TAG_VIEW_CHANGE: u8 = 0x04;
pub const TAG_BATCH: u8 = 0x05;
pub const TAG_QC: u8 = 0x06;

pub struct Writer(Vec<u8>);

impl Writer {
    pub fn tagged(tag: u8) -> Self {
        Writer(vec![tag])
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.0.push(v);
        self
    }

    pub fn u32(&mut self, v: u32) -> &mut Self {
        self.0.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        self.0.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn bytes(&mut self, v: &[u8]) -> &mut Self {
        self.0.extend_from_slice(&(v.len() as u32).to_le_bytes());
        self.0.extend_from_slice(v);
        self
    }

    pub fn opt<T>(&mut self, v: Option<&T>, mut f: impl FnMut(&mut Self, &T)) -> &mut Self {
        match v {
            None => {
                self.0.push(0);
            }
            Some(inner) => {
                self.0.push(1);
                f(self, inner);
            }
        }
        self
    }

    pub fn finish(self) -> Vec<u8> {
        self.0
    }
}
