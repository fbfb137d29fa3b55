macro_rules! example {
    ($name:ident, $file:literal) => {
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(certify_example, "certify.rs");
example!(audit_example, "reference_point_audit.rs");
example!(standing_wave_example, "standing_wave.rs");
example!(event_triggered_example, "event_triggered.rs");
example!(roundtrip_example, "verify_roundtrip.rs");

#[test]
fn certify_example_runs() {
    certify_example::run_example().expect("certify example should run");
}

#[test]
fn audit_example_runs() {
    audit_example::run_example().expect("audit example should run");
}

#[test]
fn standing_wave_example_runs() {
    standing_wave_example::run_example().expect("standing wave example should run");
}

#[test]
fn event_triggered_example_runs() {
    event_triggered_example::run_example().expect("event-triggered example should run");
}

#[test]
fn roundtrip_example_runs() {
    roundtrip_example::run_example().expect("round-trip example should run");
}
