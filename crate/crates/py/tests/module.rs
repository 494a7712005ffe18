use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyo3::wrap_pymodule;

fn run(code: &str) {
    Python::attach(|py| {
        let m = wrap_pymodule!(winomem_py::winomem_py)(py);
        let globals = PyDict::new(py);
        globals.set_item("wm", m).unwrap();
        let code = std::ffi::CString::new(code).unwrap();
        py.run(&code, Some(&globals), None).unwrap();
    });
}

#[test]
fn multiply_matches_classical_product() {
    run(r#"
a, b = wm.Matrix.random(8, 8, 65521, 1), wm.Matrix.random(8, 8, 65521, 2)
want = (a @ b).to_list()
c = wm.Matrix.zeros(8, 8)
cost = wm.multiply("acc2", a, b, c)
assert c.to_list() == want
assert cost == wm.expected_costs("acc2", 8, 8, 8)
"#);
}

#[test]
fn errors_become_value_errors() {
    run(r#"
for bad in [lambda: wm.Matrix(2, 2, [1, 2, 3], 7), lambda: wm.Matrix.zeros(2, 2, 8),
            lambda: wm.multiply("nope", wm.Matrix.zeros(2, 2), wm.Matrix.zeros(2, 2), wm.Matrix.zeros(2, 2)),
            lambda: wm.search(overwrite="sideways")]:
    try:
        bad()
        raise AssertionError("expected ValueError")
    except ValueError:
        pass
"#);
}

#[test]
fn search_outcomes() {
    run(r#"
r = wm.search("builtin:classical", pebbles=1, copy_budget=0)
assert r["outcome"] == "found", r
assert wm.validate_schedule(r["schedule"])[0]
assert wm.search("builtin:classical", pebbles=0, copy_budget=0)["outcome"] == "exhausted"
"#);
}
