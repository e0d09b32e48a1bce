#![no_main]

use libfuzzer_sys::fuzz_target;
use pao_core::report::{parse_report, to_csv_string};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(rows) = parse_report(text) {
        let again = to_csv_string(&rows).expect("parsed rows serialise");
        assert_eq!(parse_report(&again).expect("round trip").len(), rows.len());
    }
});
