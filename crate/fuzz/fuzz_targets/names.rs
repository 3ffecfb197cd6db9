#![no_main]

use eeclass::classify::Method;
use eeclass::embed::EmbeddingKind;
use eeclass::extremality::IndexKind;
use libfuzzer_sys::fuzz_target;

// Name parsers must never panic, and accepted names must print back.
fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(kind) = s.parse::<EmbeddingKind>() {
        assert!(kind.name().eq_ignore_ascii_case(s));
    }
    if let Ok(method) = s.parse::<Method>() {
        assert!(method.name().eq_ignore_ascii_case(s));
    }
    if let Ok(index) = s.parse::<IndexKind>() {
        assert!(index.name().eq_ignore_ascii_case(s));
    }
});
