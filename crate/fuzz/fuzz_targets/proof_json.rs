#![no_main]

use libfuzzer_sys::fuzz_target;
use lsbbi::kernel::{check, from_json, to_json_with_semantics, CheckOptions};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(file) = from_json(text) else {
        return;
    };
    let opts = CheckOptions {
        allow_cut: true,
        extras: file.semantics.clone(),
    };
    let report = check(&file.root, &opts);
    let again = from_json(&to_json_with_semantics(&file.root, &file.semantics)).expect("re-encoded proof decodes");
    assert_eq!(again.root, file.root);
    assert_eq!(check(&again.root, &opts).accepted, report.accepted);
});
