use trotterlab::{emit_report, Format, CSV_HEADER};
use trotterlab_core::experiments::{Check, ErrorRow, RateReport};
use trotterlab_core::numerics::fit_loglog;

fn single_row() -> RateReport {
    let row = ErrorRow {
        t: 1.0,
        n: 8,
        series: String::new(),
        sup_error: 0.125,
        opnorm_error: Some(0.25),
        scaled_error: 16.0,
    };
    RateReport::assemble("harmonic-rate", vec![row], vec![], vec![Check::info("x", Some(1.0), 1.0)], "", false)
}

fn emit(r: &RateReport, f: Format) -> Vec<u8> {
    let mut buf = Vec::new();
    emit_report(r, f, &mut buf).unwrap();
    buf
}

#[test]
fn csv_single_row_structure() {
    let text = String::from_utf8(emit(&single_row(), Format::Csv)).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[0], CSV_HEADER);
    assert!(lines[1].starts_with("harmonic-rate,"));
    assert_eq!(lines[2..].iter().filter(|l| l.starts_with("# ")).count(), 4);
    assert_eq!(lines[5], "# verdict=pass");
}

#[test]
fn csv_trailer_carries_fit() {
    let mut r = single_row();
    r.fit = Some(fit_loglog(&[(2, 0.25), (4, 0.0625)]).unwrap());
    let text = String::from_utf8(emit(&r, Format::Csv)).unwrap();
    assert!(text.contains("# slope=-2.0000000000000000e0"), "{text}");
    assert!(text.contains("# r2=1.0000000000000000e0"));
}

#[test]
fn json_round_trip() {
    let r = single_row();
    let back: RateReport = serde_json::from_slice(&emit(&r, Format::Json)).unwrap();
    assert_eq!(back, r);
}

#[test]
fn emission_is_deterministic() {
    let r = single_row();
    for f in [Format::Csv, Format::Json] {
        assert_eq!(emit(&r, f), emit(&r, f));
    }
}

#[test]
fn write_failure_surfaces() {
    struct Broken;
    impl std::io::Write for Broken {
        fn write(&mut self, _: &[u8]) -> std::io::Result<usize> {
            Err(std::io::Error::other("sink closed"))
        }
        fn flush(&mut self) -> std::io::Result<()> {
            Ok(())
        }
    }
    assert!(emit_report(&single_row(), Format::Csv, &mut Broken).is_err());
}
