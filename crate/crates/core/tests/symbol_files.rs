//! The JSON symbols shipped in `symbols/` describe the built-in catalog.

use std::path::PathBuf;

use toepspec::symbol::{catalog, CATALOG_CASES};
use toepspec::symbol::MatrixSymbol;

fn symbol_file(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("symbols").join(name)
}

#[test]
fn files_match_catalog() {
    for case in CATALOG_CASES {
        let (f, g) = catalog(case, case.needs_r().then_some(4.8)).unwrap();
        for (tag, sym) in [("f", f), ("g", g)] {
            let path = symbol_file(&format!("case{}_{tag}.json", case.number()));
            let loaded = MatrixSymbol::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            assert_eq!((loaded.k(), loaded.s()), (sym.k(), sym.s()));
            assert_eq!(loaded.is_trig(), sym.is_trig(), "{}", path.display());
            for t in 0..7 {
                let x = -3.0 + 0.93 * t as f64;
                let point = vec![x; sym.k()];
                if sym.hits_singular_point(&point) {
                    continue;
                }
                let diff = loaded.evaluate(&point).unwrap().max_abs_diff(&sym.evaluate(&point).unwrap());
                assert!(diff < 1e-12, "{} at {x}: {diff:e}", path.display());
            }
        }
    }
}

#[test]
fn case_two_file_keeps_r_as_a_parameter() {
    let text = std::fs::read_to_string(symbol_file("case2_f.json")).unwrap();
    let mut doc: toepspec::symbol::SymbolDocument = serde_json::from_str(&text).unwrap();
    doc.params.insert("r".into(), 1.0);
    let sym = MatrixSymbol::from_document(&doc).unwrap();
    let (f, _) = catalog(toepspec::symbol::CaseId::Two, Some(1.0)).unwrap();
    let x = [0.4];
    assert!(sym.evaluate(&x).unwrap().max_abs_diff(&f.evaluate(&x).unwrap()) < 1e-12);
}
