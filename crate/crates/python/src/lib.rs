//! Python bindings: graphs, simulations, trace checkers and the DFS oracle.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

use dispersion_core::checkers::{oracle_dfs, Checker};
use dispersion_core::engine::{run, run_election, SimulationConfig};
use dispersion_core::graph::{parse_graph, write_graph, GraphSpec, NodeId, Port, PortLabeledGraph};
use dispersion_core::robot::{memory_bound_bits, memory_footprint_bits as footprint};
use dispersion_core::trace::{read_trace, trace_to_string, SimulationResult, TraceLevel};

fn value_error(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Converts anything serializable into plain Python objects via `json`.
fn to_python<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(value_error)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// An anonymous graph with local port numbers at every node.
#[pyclass(name = "Graph", module = "dispersion", frozen)]
struct PyGraph {
    inner: PortLabeledGraph,
}

#[pymethods]
impl PyGraph {
    /// Builds a graph from a spec such as `gen:ring:8` or `gen:random:20:40:7`.
    #[staticmethod]
    fn generate(spec: &str) -> PyResult<Self> {
        let spec: GraphSpec = spec.parse().map_err(value_error)?;
        Ok(PyGraph { inner: spec.generate().map_err(value_error)? })
    }

    /// Parses the text format: `n m`, then one `u pu v pv` line per edge.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(PyGraph { inner: parse_graph(text).map_err(value_error)? })
    }

    fn to_text(&self) -> String {
        write_graph(&self.inner)
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    #[getter]
    fn max_degree(&self) -> u32 {
        self.inner.max_degree()
    }

    fn degree(&self, node: usize) -> PyResult<u32> {
        self.check_node(node)?;
        Ok(self.inner.degree(NodeId(node)))
    }

    /// `(neighbor, arrival port)` reached by leaving `node` through `port`.
    fn neighbor_via(&self, node: usize, port: u32) -> PyResult<(usize, u32)> {
        self.check_node(node)?;
        let (v, q) = self.inner.neighbor_via(NodeId(node), Port(port)).map_err(value_error)?;
        Ok((v.0, q.0))
    }

    fn edges(&self) -> Vec<(usize, u32, usize, u32)> {
        self.inner.edges()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(nodes={}, edges={}, max_degree={})",
            self.inner.node_count(),
            self.inner.edge_count(),
            self.inner.max_degree()
        )
    }
}

impl PyGraph {
    fn check_node(&self, node: usize) -> PyResult<()> {
        if node < self.inner.node_count() {
            Ok(())
        } else {
            Err(value_error(format!("node {node} out of range")))
        }
    }
}

/// A finished simulation: its summary and recorded trace.
#[pyclass(name = "Run", module = "dispersion", frozen)]
struct PyRun {
    inner: SimulationResult,
}

#[pymethods]
impl PyRun {
    #[getter]
    fn summary<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_python(py, &self.inner.summary)
    }

    #[getter]
    fn outcome<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_python(py, &self.inner.summary.outcome)
    }

    #[getter]
    fn rounds(&self) -> u64 {
        self.inner.summary.rounds
    }

    #[getter]
    fn t1(&self) -> Option<u64> {
        self.inner.summary.t1
    }

    #[getter]
    fn t2(&self) -> Option<u64> {
        self.inner.summary.t2
    }

    #[getter]
    fn positions(&self) -> Vec<usize> {
        self.inner.summary.positions.iter().map(|v| v.0).collect()
    }

    /// Per-round records as Python dicts.
    fn records<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_python(py, &self.inner.trace)
    }

    fn trace_jsonl(&self) -> String {
        trace_to_string(&self.inner)
    }

    #[staticmethod]
    fn from_jsonl(text: &str) -> PyResult<Self> {
        Ok(PyRun { inner: read_trace(text.as_bytes()).map_err(value_error)? })
    }

    /// Runs the named checkers (all by default); returns one verdict dict each.
    #[pyo3(signature = (graph, checkers=None))]
    fn verify<'py>(
        &self,
        py: Python<'py>,
        graph: &PyGraph,
        checkers: Option<Vec<String>>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let selected = match checkers {
            None => Checker::ALL.to_vec(),
            Some(names) => names.iter().map(|n| n.parse()).collect::<Result<_, _>>().map_err(value_error)?,
        };
        let verdicts: Vec<_> = selected.iter().map(|c| c.verdict(&self.inner, &graph.inner)).collect();
        to_python(py, &verdicts)
    }

    fn __repr__(&self) -> String {
        let s = &self.inner.summary;
        format!("Run(k={}, outcome={:?}, rounds={})", s.k, s.outcome, s.rounds)
    }
}

#[pyfunction]
#[pyo3(signature = (graph, k, root=0, seed=0, max_rounds=None, trace_level="full"))]
fn simulate(
    py: Python<'_>,
    graph: &PyGraph,
    k: usize,
    root: usize,
    seed: u64,
    max_rounds: Option<u64>,
    trace_level: &str,
) -> PyResult<PyRun> {
    let level: TraceLevel = trace_level.parse().map_err(value_error)?;
    let mut config = SimulationConfig::new(k).root(NodeId(root)).seed(seed).trace_level(level);
    config.max_rounds = max_rounds;
    let result = py.detach(|| run(&graph.inner, &config)).map_err(value_error)?;
    Ok(PyRun { inner: result })
}

/// Centralized DFS reference: walk, settle order, parent ports and rootpath.
#[pyfunction]
fn reference_dfs<'py>(py: Python<'py>, graph: &PyGraph, root: usize, k: usize) -> PyResult<Bound<'py, PyAny>> {
    let oracle = oracle_dfs(&graph.inner, NodeId(root), k).map_err(value_error)?;
    to_python(py, &oracle)
}

/// Leader election among `k` co-located robots.
#[pyfunction]
#[pyo3(signature = (k, seed=0, max_subrounds=10_000))]
fn elect(k: usize, seed: u64, max_subrounds: u32) -> PyResult<(usize, usize, usize, u32)> {
    let r = run_election(k, seed, max_subrounds).map_err(value_error)?;
    Ok((r.leaders, r.followers, r.alone, r.subrounds))
}

/// Bits a robot needs on graphs of maximum degree `max_degree`.
#[pyfunction]
fn memory_footprint_bits(max_degree: u32) -> u32 {
    footprint(max_degree)
}

#[pyfunction]
fn memory_bound(max_degree: u32) -> u32 {
    memory_bound_bits(max_degree)
}

#[pymodule]
pub fn dispersion(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyRun>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(reference_dfs, m)?)?;
    m.add_function(wrap_pyfunction!(elect, m)?)?;
    m.add_function(wrap_pyfunction!(memory_footprint_bits, m)?)?;
    m.add_function(wrap_pyfunction!(memory_bound, m)?)?;
    m.add("CHECKERS", Checker::ALL.iter().map(|c| c.name()).collect::<Vec<_>>())?;
    Ok(())
}
