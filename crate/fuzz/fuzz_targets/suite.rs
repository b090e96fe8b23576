#![no_main]

use libfuzzer_sys::fuzz_target;
use lsbbi::formula::{parse, parse_suite};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(entries) = parse_suite(text) {
        for e in entries {
            assert_eq!(parse(&e.text).as_ref(), Ok(&e.formula));
        }
    }
});
