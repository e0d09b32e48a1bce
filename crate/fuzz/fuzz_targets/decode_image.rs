#![no_main]

use libfuzzer_sys::fuzz_target;
use pao_core::io::decode_image;

fuzz_target!(|data: &[u8]| {
    if let Ok(img) = decode_image(data) {
        assert_eq!(img.data().len(), img.rows() * img.cols() * img.channels());
    }
});
