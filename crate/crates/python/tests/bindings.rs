use std::ffi::CString;

use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module(code: &str) {
    pyo3::append_to_inittab!(dispersion_module);
    Python::attach(|py| {
        let globals = PyDict::new(py);
        let code = CString::new(code).unwrap();
        py.run(&code, Some(&globals), None).map_err(|e| e.display(py)).expect("python code runs");
    });
}

#[pymodule]
#[pyo3(name = "dispersion")]
fn dispersion_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    dispersion::dispersion(m)
}

#[test]
fn python_round_trip() {
    with_module(
        r#"
import dispersion
g = dispersion.Graph.generate("gen:complete:6")
assert g.max_degree == 5
r = dispersion.simulate(g, 6, seed=3)
assert r.rounds == r.t1 + r.t2 + 2
assert all(v["pass"] for v in r.verify(g))
bad = dispersion.Run.from_jsonl(r.trace_jsonl().replace('"bits":31', '"bits":1000', 1))
assert not bad.verify(g, ["memory"])[0]["pass"]
try:
    dispersion.Graph.generate("gen:ring:2")
    raise AssertionError("ring of two accepted")
except ValueError:
    pass
"#,
    );
}
