//! Fixed public parameters generated offline by a deterministic
//! SHAKE256-seeded search, embedded so key setup stays fast.
//!
//! Prime factors below belong to simulation keys only.

use num_bigint::BigUint;

fn parse(chunks: &[&str]) -> BigUint {
    BigUint::parse_bytes(chunks.concat().as_bytes(), 16).expect("valid hex constant")
}

const SCHNORR_P: &[&str] = &[
    "db945d5193407c3add78bdebb832a591d16e357e897a4fa4b1a97118fb84a19add85e35ac23eb485427e138043fbcd3a",
    "e4dd187ba18081d0b21952c0484122528199ecd6446d531942b007529b5b7b162d06036ffb54ce4e72624f502a1e6fb7",
    "341d811edcc5d533706e1eb8b7ac4b027ec1e185f6b3e8dcfd558307b16e07ae1482c9357edb7ce41197ca98555fb340",
    "6f88a4d0c884237e707bc58053ea0b053f278215eee4b3003aab792a5d16010caeac1afeab9af10281ff19b52e028a01",
    "fa618314dbaa9ae87d858c4b637156f16883176b0a64da8be4726f5f52b436221f2214bf52f04c3f88d307ba49199d18",
    "5c3766dea753a772b63c6e94da6b67cc10f5d83aa36e2aca141f723b84805e75121e71a2667be03589ec7116a14d96b3",
    "8b5f67a3264e67e7b216c712c065e18bca8f8b82a34aab8a7fe01887b2210c8320e8373769f89ed3ea376a285beb258f",
    "5e57344385342b99a5252d5fef07a1bb362e24b32dcfa64856f4ad461e7b963a5b264b900fd42c832b1a6bcb83c2bb29",
];

const SCHNORR_Q: &[&str] = &[
    "f3462c43c6a634f66b1f03955565b974f6ad2f658ed9c888fb60ebf46c035939",
];

const SCHNORR_G: &[&str] = &[
    "894eb9452654522ee65be1a87e7a5c78e1d8e70f8390d6aad90a57d52f68af201e1bb98362731d1b3513ac38a64ca35b",
    "728ffe018aaffcb967b813ad6747572cf0144e4f075fceb4dba4c03ecb642bd8738b37df1e0d51c87ea6f573494bea87",
    "05e6f9cefa55fb092356f8f29871e273b81df63619422a81e00bcaf6afc5471352ac8ae2d8fd5b9a6b1470bc0e41c9c2",
    "9111513029352ccd53d42991bf901212c789010cf133154ba89d5f8e225de03ed48edae3fc366155cc4956f457a88653",
    "6d6018342e6e7a4289fe2322124eb26d9decf98562fabcc52a3cd1b714f4b90c05f2a8ff5e403ab7c0e69a08dd3bf9d1",
    "7a1588ced57e843cc6a99338d778b29979d7b2bbc0a15ac1041ee9c4b8a340bc46f14ddfa4ae6bf35e9366a5126ed11f",
    "3adf60532dd54fc6c30dd6ea9b580e5af8de03caf205578a2c777781ad44b7d12fa31e8bcf1387451568e1c32a8c9bc1",
    "094f738c4ba0f68409f7fa5a362153d4077ed46d4c3b81b9b77fbeec83a2f9aa4ad8b9e4e8519465a768a246fb779755",
];

const RSA_PRIME_0: &[&str] = &[
    "d8847b1077bc410a425d3e48b6791c86c5c7ab37c3d0d8315dc3dead80ad76119bdce21416f033ed96a90f0509bf0211",
    "58c3126962782a82d03c2d9b4efca303ec0754ff906ce33193a538a6d9d5e9416d7cd3d9405bff7dbb3244e996b26a62",
    "37069cba0bf488241359d1be3461779d70a7f9f921f9a6b951872b5fa84e56029a627119422acb4c6108cd0205494378",
    "2d239454831d9786533b259b70c0a8d9262b99b2df548ffb0f62aea2590b5ac464f19ef0e9db8dbdd4cd73dc8a14885f",
];

const RSA_PRIME_1: &[&str] = &[
    "e2526dd353dbf01080756e3606d259c7db7c791d5d34080b8cbc8da320868007328e945cb0044ab2b17d2fe100d40241",
    "4972a04e7b80f734b9935b9c349e504dfe1be466b5ae1d34944dfafa3341d52eedc451af38f298f7003481fd4d893562",
    "96acf383e4003baddb33d9dafc2734a6a9f08e16010aa331fd98845c2d6fb4038c93779fe9cbc66f07e09b9116379dbd",
    "f2eaae672fc213b1a71c18794cdbc3309be7bc139d2d6d6df56a82ff44212c83b1d48eafb871f03e7f1b770e3451c93d",
];

const RSA_PRIME_2: &[&str] = &[
    "f7b82a433620cfc6a50b103e8c12ed2d6460115ebebde3a850a1cc20169e2fa0bca4ba34132b465dff1ce07544e58b22",
    "70f61963dc8acf7f625d834c89e7f353ddf91085e4d1874780a3cdb996cf7e1aa5c785c1d792e5a6eeb04deded23e3f4",
    "74c6e88a1ed181927fc851af369c3655ce5b8e54fc9491f657f7163de9b0df42295b5ca98e8ae4285c0b172c8fa4e179",
    "32dc4ff3d36a07907ef39546f3ba98dc314dff9a0e7d584ca2febccdefcca8982c52a3a2480f3c81863429c2a74d828d",
];

const RSA_PRIME_3: &[&str] = &[
    "fe0c43c248ae04b4ce1d15bd1a5b9011865bcb27fbd9a4afeb0773d96196a800837864e0f6a53d8c5389a49b2484bb14",
    "65d757260a518da3e798947d56940b80a77d1b13bce8e7d7dd4b5ed9b20ab863dda4f4deba0e1c05bd2cef95806e4f6a",
    "0bbf7d03a3f55722e0b223c9ae7004c173358c75666c7e35464691998a3fbf16ccc3dc3b94098824f590a298d0a54046",
    "42835e2e9d56c286e33db597e4e5f3f46e9a3db12f3d36e6144bc06ca3861a95539dea90b13b69e1173acae74f3cc7d5",
];

const SAFE_PRIME_0: &[&str] = &[
    "aab244536a9bced0acb1249e27ad3b0a29bc2773159b672955f95dee6833388a1a8ac8e6f49720716e14edf02ab40c5d",
    "9b89e2db14e3d6132653257628b15a477452f8f8800bf2c97add374a263f115243e2a7f7c2d58b64c4d53eb31c35434a",
    "7e275167980956ea2b73dc924d2b0320a67901104c59f82e307564045cdb9f094f0a90f79a46e7a0bf0d7fdbada9a0d2",
    "600e25b251cb58e71dd3ecbb4ecd67dd0dc77e81653b6d6eb1b8988b3bdcb9697e5c2e4862690113c4fff03cc1692c17",
];

const SAFE_PRIME_1: &[&str] = &[
    "e3c876c4f9df57cfabd0a2b023e4d54b93075008350e775a8601911abc9f222e8b1acd563943d25221c2b5726a897018",
    "abfa307d352e8b8d3dabea181de3e65a98b271693bfeb6332884d555bcc41c3345cf7b0e3eb283756046e2686b633cb9",
    "521d1ec8e6415405c96703ec1059fdeadddc7337cfb24073286d8ccda98ee874f94df1ab44a58a50b981f985de2839ac",
    "215c700a7531b0b8ba961e07d3ca5e1e8610ea2e0e5f523c48d61e07df1ba78643a439598e5e214c423cd4f8cc546033",
];

const SAFE_PRIME_2: &[&str] = &[
    "b498d3c93bb2567a9b4d5c831a2babc78dcce9048e2d8b308746fc7dcba9e09cb336945c86857c2aafbfe99bff537deb",
    "f5e17b4590afde21ced7054180c363b2a08e45c40c94f4a84d7b04fd4a394ef77061e09512983634d148d30498302a84",
    "0de82dde3747a49acad8ccb796d0f8b3ea8391fa2bc5faa83519e954cfbd2524dd36c516afa92352605854eadae874eb",
    "73f387c4aa4d5ce08d70442c019ceacc0e1961c94db1f3774b84c7e4e7a760257c74f208d590ce13a6d4902e60a11f7f",
];

const SAFE_PRIME_3: &[&str] = &[
    "d45ba904568ad78b61c6460bd07a7d1df0ed55732fb778b812b4fd76e6be58962564f5aac5e315abba1598e49f63737e",
    "0b01427d6a0adfd98586abfeb4305f9a2efee36bc05864d18c9984f7b5261b799f76755dccb97a03a189c3f557571fb3",
    "551470e795a9f3ad31b49103288c2aeeab10281cfc5f87ebdd91834b91559df81603b8c71c7f31aee3f605b58d593098",
    "80862ec69ec43a341e0b817006734ba31717cf5d32e117aaf8b50dd5e0bfaf4f20a95ef93ce8a14267a197d71c6e8ff7",
];

/// `(p, q, g)` of the 3072/256-bit Schnorr group.
pub fn schnorr_group() -> (BigUint, BigUint, BigUint) {
    (parse(SCHNORR_P), parse(SCHNORR_Q), parse(SCHNORR_G))
}

/// 1536-bit prime pairs for RSA keys; index 0 or 1.
pub fn rsa_primes(index: usize) -> (BigUint, BigUint) {
    match index {
        0 => (parse(RSA_PRIME_0), parse(RSA_PRIME_1)),
        1 => (parse(RSA_PRIME_2), parse(RSA_PRIME_3)),
        _ => panic!("no RSA prime pair {index}"),
    }
}

/// 1536-bit safe-prime pairs for strong-RSA moduli; index 0 or 1.
pub fn safe_primes(index: usize) -> (BigUint, BigUint) {
    match index {
        0 => (parse(SAFE_PRIME_0), parse(SAFE_PRIME_1)),
        1 => (parse(SAFE_PRIME_2), parse(SAFE_PRIME_3)),
        _ => panic!("no safe prime pair {index}"),
    }
}
