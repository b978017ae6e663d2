//! Property tests across the cipher and the wire format.

use proptest::prelude::*;

use lsa_core::{
    cbc_mac, ctr_crypt, decrypt_block, encrypt_block, expand_key, Block, Frame, FrameType,
    MacTag, MasterKey,
};

fn arb_key() -> impl Strategy<Value = MasterKey> {
    any::<[u8; 16]>().prop_map(MasterKey)
}

proptest! {
    #[test]
    fn encrypt_then_decrypt_is_identity(key in arb_key(), pt in any::<[u8; 16]>()) {
        let ks = expand_key(&key);
        let ct = encrypt_block(Block::from_bytes(pt), &ks);
        prop_assert_eq!(decrypt_block(ct, &ks).to_bytes(), pt);
    }

    #[test]
    fn ctr_is_an_involution(
        key in arb_key(),
        counter in any::<u64>(),
        epoch in any::<u8>(),
        data in proptest::collection::vec(any::<u8>(), 0..512),
    ) {
        let ks = expand_key(&key);
        let once = ctr_crypt(&ks, counter, epoch, &data).unwrap();
        prop_assert_eq!(once.len(), data.len());
        let twice = ctr_crypt(&ks, counter, epoch, &once).unwrap();
        prop_assert_eq!(twice, data);
    }

    #[test]
    fn distinct_counters_give_distinct_keystreams(
        key in arb_key(),
        c1 in any::<u64>(),
        c2 in any::<u64>(),
        epoch in any::<u8>(),
    ) {
        prop_assume!(c1 != c2);
        let ks = expand_key(&key);
        let zeros = [0u8; 32];
        let s1 = ctr_crypt(&ks, c1, epoch, &zeros).unwrap();
        let s2 = ctr_crypt(&ks, c2, epoch, &zeros).unwrap();
        prop_assert_ne!(s1, s2);
    }

    #[test]
    fn mac_separates_messages(key in arb_key(), a in proptest::collection::vec(any::<u8>(), 0..64),
                              b in proptest::collection::vec(any::<u8>(), 0..64)) {
        prop_assume!(a != b);
        let ks = expand_key(&key);
        prop_assert_ne!(cbc_mac(&ks, &a).unwrap(), cbc_mac(&ks, &b).unwrap());
    }

    #[test]
    fn frame_serialize_parse_roundtrip(
        ft in prop_oneof![
            Just(FrameType::Data),
            Just(FrameType::DataFresh),
            Just(FrameType::Bcast),
            Just(FrameType::Disclose),
        ],
        src in any::<u16>(),
        dst in any::<u16>(),
        epoch in any::<u8>(),
        counter in any::<u64>(),
        nonce in any::<[u8; 8]>(),
        body in proptest::collection::vec(any::<u8>(), 0..256),
        mac in any::<[u8; 8]>(),
    ) {
        let f = Frame {
            frame_type: ft,
            src,
            dst,
            epoch,
            counter,
            nonce: (ft == FrameType::DataFresh).then_some(nonce),
            body,
            mac: MacTag(mac),
        };
        let bytes = f.serialize();
        prop_assert_eq!(bytes.len(), f.serialized_len());
        let parsed = Frame::parse(&bytes).unwrap();
        prop_assert_eq!(parsed, f);

        // Any truncation or extension must fail to parse.
        if !bytes.is_empty() {
            prop_assert!(Frame::parse(&bytes[..bytes.len() - 1]).is_err());
        }
        let mut longer = bytes.clone();
        longer.push(0);
        prop_assert!(Frame::parse(&longer).is_err());
    }
}
