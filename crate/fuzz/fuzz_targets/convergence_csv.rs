#![no_main]

use libfuzzer_sys::fuzz_target;
use plategoal_cli::ConvergenceTable;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(table) = ConvergenceTable::parse(text) {
        for name in table.header() {
            assert_eq!(table.column(name).unwrap().len(), table.n_rows());
        }
        let _ = table.slope("e_goal", 3);
    }
});
