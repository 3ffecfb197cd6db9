#![no_main]

use eeclass::fdata;
use libfuzzer_sys::fuzz_target;

// Anything that parses must survive a save/load round trip unchanged.
fuzz_target!(|data: &[u8]| {
    if let Ok(dataset) = fdata::parse_csv(data) {
        let text = fdata::to_csv_string(&dataset);
        let back = fdata::parse_csv(text.as_bytes()).expect("canonical output parses");
        assert_eq!(back, dataset);
        assert_eq!(fdata::to_csv_string(&back), text);
    }
});
