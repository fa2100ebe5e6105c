#![no_main]

use libfuzzer_sys::fuzz_target;
use subdiff_core::noise::PathDump;

fuzz_target!(|data: &[u8]| {
    let Ok(dump) = PathDump::decode(data) else {
        return;
    };
    // Anything the decoder accepts is a well-formed dump, so re-encoding
    // reproduces the input byte for byte.
    let path = dump
        .into_path(0, 0)
        .expect("decoded dump converts to a path");
    assert_eq!(path.to_dump_bytes(), data);
});
