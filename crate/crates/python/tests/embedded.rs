// Copyright 2026 The torpsido Authors
// SPDX-License-Identifier: Apache-2.0

use pyo3::prelude::*;
use pyo3::types::PyDict;
use pyo3::wrap_pymodule;

#[test]
fn module_runs_inside_an_interpreter() {
    Python::initialize();
    Python::attach(|py| {
        let module = wrap_pymodule!(torpsido_py::torpsido_py)(py);
        let locals = PyDict::new(py);
        locals.set_item("tp", module).unwrap();
        let code = c"
import json
s = tp.Symbol('{\"name\": \"identity\"}', radius=2, d_out=2, d_in=2)
assert s.tail == 'invertible-identity-like'
assert json.loads(s.index())['index'] == 0
assert abs(tp.schatten_norm([[1, 0], [0, -2]], 1.0) - 3.0) < 1e-12
r = json.loads(tp.matrix_index([[1, 2, 3]]))
assert (r['ker_dim'], r['coker_dim']) == (2, 0)
";
        py.run(code, None, Some(&locals)).unwrap();
    });
}
