use crate::ReplicaId;

/// Message authenticator, packed into 64 bits.
///
/// The election logic never inspects signatures, it only asks an
/// [`Authenticator`] to produce and check them, so a real signature scheme
/// can replace the simulation one by swapping the implementation behind the
/// trait (widening this type along with it).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature(pub u64);

/// Signing and verification seam.
pub trait Authenticator {
    fn sign(&self, signer: ReplicaId, message: &[u8]) -> Signature;
    fn verify(&self, signer: ReplicaId, message: &[u8], signature: &Signature) -> bool;
}

/// Deterministic keyed-hash authenticator for simulation and tests.
///
/// Every party can derive every key, so this is unforgeable only by
/// construction: simulated replicas sign exclusively through their own
/// engine's handle. That is exactly the adversary model the simulator wants,
/// and it keeps runs reproducible and cheap.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimAuthenticator;

impl SimAuthenticator {
    fn key(signer: ReplicaId) -> u64 {
        splitmix64(0x51_E7_EC_70_u64 ^ (u64::from(signer) << 17))
    }

    fn mac(signer: ReplicaId, message: &[u8]) -> u64 {
        let mut h = fnv1a64(message);
        h ^= Self::key(signer);
        splitmix64(h)
    }
}

impl Authenticator for SimAuthenticator {
    fn sign(&self, signer: ReplicaId, message: &[u8]) -> Signature {
        Signature(Self::mac(signer, message))
    }

    fn verify(&self, signer: ReplicaId, message: &[u8], signature: &Signature) -> bool {
        Self::mac(signer, message) == signature.0
    }
}

/// FNV-1a over a byte slice.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325_u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// SplitMix64 finalizer; also used to derive per-purpose seeds elsewhere.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_verify_roundtrip() {
        let auth = SimAuthenticator;
        let sig = auth.sign(3, b"hello");
        assert!(auth.verify(3, b"hello", &sig));
        assert!(!auth.verify(2, b"hello", &sig));
        assert!(!auth.verify(3, b"hellp", &sig));
        assert!(!auth.verify(3, b"hello", &Signature(sig.0 ^ 1)));
    }

    #[test]
    fn signatures_are_deterministic() {
        let a = SimAuthenticator;
        let b = SimAuthenticator;
        assert_eq!(a.sign(7, b"msg"), b.sign(7, b"msg"));
    }
}
