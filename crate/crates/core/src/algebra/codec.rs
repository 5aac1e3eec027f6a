//! Canonical byte encodings.
//!
//! | type      | encoding                                   | width |
//! |-----------|--------------------------------------------|-------|
//! | `Scalar`  | big-endian, must be `< r`                  | 32    |
//! | `G1`      | compressed point (ZCash flags)             | 48    |
//! | `G2`      | compressed point (ZCash flags)             | 96    |
//! | `GT`      | `Fq12` coefficients, must lie in order-`r` | 576   |
//!
//! JSON wraps every encoding in lowercase hex. Decoding rejects uppercase
//! hex so that each value has exactly one textual form.

use ark_ff::{BigInteger, PrimeField};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize, Compress, Validate};
use num_bigint::BigUint;
use serde::{Deserialize, Deserializer, Serializer};
use thiserror::Error;

use super::{G1Element, G2Element, GtElement, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error("{kind}: expected {expected} bytes, got {got}")]
    Length {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{0}: scalar not below the group order")]
    OutOfRange(&'static str),
    #[error("{0}: not a valid group element")]
    InvalidElement(&'static str),
    #[error("malformed hex: {0}")]
    Hex(String),
}

/// Fixed-width canonical encoding.
pub trait Codec: Sized {
    const KIND: &'static str;
    const WIDTH: usize;

    fn to_bytes(&self) -> Vec<u8>;
    fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError>;

    fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    fn from_hex(s: &str) -> Result<Self, CodecError> {
        Self::from_bytes(&decode_hex(s)?)
    }
}

fn check_len(kind: &'static str, expected: usize, bytes: &[u8]) -> Result<(), CodecError> {
    if bytes.len() != expected {
        return Err(CodecError::Length {
            kind,
            expected,
            got: bytes.len(),
        });
    }
    Ok(())
}

/// Strict lowercase hex decoding.
pub fn decode_hex(s: &str) -> Result<Vec<u8>, CodecError> {
    if s.bytes().any(|b| b.is_ascii_uppercase()) {
        return Err(CodecError::Hex("uppercase digits are not canonical".into()));
    }
    hex::decode(s).map_err(|e| CodecError::Hex(e.to_string()))
}

impl Codec for Scalar {
    const KIND: &'static str = "scalar";
    const WIDTH: usize = 32;

    fn to_bytes(&self) -> Vec<u8> {
        self.into_bigint().to_bytes_be()
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
        check_len(Self::KIND, Self::WIDTH, bytes)?;
        let n = BigUint::from_bytes_be(bytes);
        let modulus: BigUint = Scalar::MODULUS.into();
        if n >= modulus {
            return Err(CodecError::OutOfRange(Self::KIND));
        }
        Ok(Scalar::from_be_bytes_mod_order(bytes))
    }
}

macro_rules! ark_codec {
    ($ty:ty, $kind:expr, $width:expr, $compress:expr) => {
        impl Codec for $ty {
            const KIND: &'static str = $kind;
            const WIDTH: usize = $width;

            fn to_bytes(&self) -> Vec<u8> {
                let mut out = Vec::with_capacity($width);
                self.serialize_with_mode(&mut out, $compress)
                    .expect("serializing into a Vec cannot fail");
                out
            }

            fn from_bytes(bytes: &[u8]) -> Result<Self, CodecError> {
                check_len(Self::KIND, Self::WIDTH, bytes)?;
                <$ty>::deserialize_with_mode(bytes, $compress, Validate::Yes)
                    .map_err(|_| CodecError::InvalidElement(Self::KIND))
            }
        }
    };
}

ark_codec!(G1Element, "G1", 48, Compress::Yes);
ark_codec!(G2Element, "G2", 96, Compress::Yes);
ark_codec!(GtElement, "GT", 576, Compress::Yes);

/// `#[serde(with = "hex_elem")]` for any [`Codec`] value.
pub mod hex_elem {
    use super::*;

    pub fn serialize<T: Codec, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_hex())
    }

    pub fn deserialize<'de, T: Codec, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        let s = String::deserialize(d)?;
        T::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "hex_elems")]` for `Vec<T: Codec>`.
pub mod hex_elems {
    use super::*;
    use serde::Serialize;

    pub fn serialize<T: Codec, S: Serializer>(v: &[T], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(Codec::to_hex).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, T: Codec, D: Deserializer<'de>>(d: D) -> Result<Vec<T>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| T::from_hex(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Byte strings as lowercase hex.
pub mod hex_bytes {
    use super::*;

    pub fn serialize<T: AsRef<[u8]>, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(v.as_ref()))
    }

    pub fn deserialize<'de, T, D>(d: D) -> Result<T, D::Error>
    where
        T: TryFrom<Vec<u8>>,
        D: Deserializer<'de>,
    {
        let s = String::deserialize(d)?;
        let bytes = decode_hex(&s).map_err(serde::de::Error::custom)?;
        let len = bytes.len();
        T::try_from(bytes)
            .map_err(|_| serde::de::Error::custom(format!("unexpected length {len}")))
    }
}

/// Unsigned big integers as minimal big-endian lowercase hex (`"00"` for zero).
pub mod hex_uint {
    use super::*;

    pub fn encode(v: &BigUint) -> String {
        hex::encode(v.to_bytes_be())
    }

    pub fn decode(s: &str) -> Result<BigUint, CodecError> {
        let bytes = decode_hex(s)?;
        let v = BigUint::from_bytes_be(&bytes);
        if encode(&v) != s {
            return Err(CodecError::Hex("non-minimal integer encoding".into()));
        }
        Ok(v)
    }

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&encode(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        decode(&s).map_err(serde::de::Error::custom)
    }
}

pub mod hex_uints {
    use super::*;
    use serde::Serialize;

    pub fn serialize<S: Serializer>(v: &[BigUint], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(hex_uint::encode).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigUint>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| hex_uint::decode(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{seeded_rng, PairingContext};
    use ark_ff::{UniformRand, Zero};

    #[test]
    fn identity_of_g1_round_trips() {
        let id = G1Element::zero();
        let bytes = id.to_bytes();
        assert_eq!(bytes.len(), 48);
        // compressed infinity: flag bits 0b110 in the top byte, rest zero
        assert_eq!(bytes[0], 0xc0);
        assert!(bytes[1..].iter().all(|b| *b == 0));
        assert_eq!(G1Element::from_bytes(&bytes).unwrap(), id);
    }

    #[test]
    fn scalar_encoding_is_big_endian() {
        let one = Scalar::from(1u64);
        let bytes = one.to_bytes();
        assert_eq!(bytes[31], 1);
        assert!(bytes[..31].iter().all(|b| *b == 0));
    }

    #[test]
    fn scalar_out_of_range_is_rejected() {
        let modulus: BigUint = Scalar::MODULUS.into();
        let mut bytes = modulus.to_bytes_be();
        assert_eq!(bytes.len(), 32);
        assert_eq!(
            Scalar::from_bytes(&bytes),
            Err(CodecError::OutOfRange("scalar"))
        );
        bytes = vec![0xff; 32];
        assert!(Scalar::from_bytes(&bytes).is_err());
    }

    #[test]
    fn wrong_lengths_are_rejected() {
        assert!(matches!(
            G2Element::from_bytes(&[0u8; 95]),
            Err(CodecError::Length { .. })
        ));
        assert!(matches!(
            GtElement::from_bytes(&[0u8; 10]),
            Err(CodecError::Length { .. })
        ));
    }

    #[test]
    fn gt_outside_subgroup_is_rejected() {
        // 576 zero bytes decode to the field element 0, which is not in GT.
        assert!(GtElement::from_bytes(&[0u8; 576]).is_err());
        let ctx = PairingContext::global();
        let z = ctx.z;
        assert_eq!(GtElement::from_bytes(&z.to_bytes()).unwrap(), z);
    }

    #[test]
    fn uppercase_hex_is_not_canonical() {
        let s = Scalar::from(255u64).to_hex();
        assert!(Scalar::from_hex(&s).is_ok());
        assert!(Scalar::from_hex(&s.to_uppercase()).is_err());
    }

    #[test]
    fn hex_uint_is_minimal() {
        assert_eq!(hex_uint::encode(&BigUint::from(0u8)), "00");
        assert_eq!(hex_uint::decode("0102").unwrap(), BigUint::from(258u32));
        assert!(hex_uint::decode("000102").is_err());
    }

    #[test]
    fn scalar_round_trip_random() {
        let mut rng = seeded_rng(1);
        for _ in 0..200 {
            let s = Scalar::rand(&mut rng);
            assert_eq!(Scalar::from_bytes(&s.to_bytes()).unwrap(), s);
        }
    }
}
