use std::collections::{BTreeSet, HashMap};

use ::bregtree::{
    dendrogram_purity, Dataset, Dendrogram, DivergenceModel, Document, Error, ExpFamModel, Family, LabeledDataset,
    ModelKind, Pipeline, RunStats, SmoothingChoice, SquaredEuclidean, StatVec, Strategy, L1,
};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

/// A dendrogram together with the configuration that built it.
#[pyclass(name = "Tree", module = "bregtree_py", frozen)]
struct PyTree {
    tree: Dendrogram,
    context: Option<(Pipeline, Dataset)>,
    stats: Option<RunStats>,
}

#[pymethods]
impl PyTree {
    /// Parse a tree previously written by `to_json`. Reloaded trees cannot
    /// produce features.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyTree { tree: Dendrogram::from_json(text).map_err(to_py)?, context: None, stats: None })
    }

    #[getter]
    fn num_leaves(&self) -> usize {
        self.tree.num_leaves()
    }

    #[getter]
    fn model(&self) -> &str {
        self.tree.model()
    }

    /// `(left, right, cost)` for each merge; the new cluster gets id
    /// `num_leaves + position`.
    fn merges(&self) -> Vec<(usize, usize, f64)> {
        self.tree
            .merges()
            .iter()
            .map(|n| {
                let (l, r) = n.children.expect("internal node");
                (l, r, n.merge_cost.unwrap_or(f64::NAN))
            })
            .collect()
    }

    /// Leaf ids of each of the top `k` clusters.
    fn cut(&self, k: usize) -> PyResult<Vec<Vec<usize>>> {
        let ids = self.tree.cut_ids(k).map_err(to_py)?;
        Ok(ids.into_iter().map(|i| self.tree.leaves_under(i)).collect())
    }

    fn to_json(&self) -> String {
        self.tree.to_json()
    }

    fn to_newick(&self) -> String {
        self.tree.to_newick()
    }

    /// Dendrogram purity against one label per leaf.
    fn purity(&self, labels: Vec<String>) -> PyResult<f64> {
        let ds = LabeledDataset::new(&labels).map_err(to_py)?;
        dendrogram_purity(&self.tree, &ds).map_err(to_py)
    }

    /// Row `i` holds the cost of adding datum `i` to each of the top `k`
    /// clusters.
    fn features(&self, py: Python<'_>, k: usize) -> PyResult<Vec<Vec<f64>>> {
        let (p, data) = self
            .context
            .as_ref()
            .ok_or_else(|| PyValueError::new_err("tree was loaded from JSON; features need the original data"))?;
        py.detach(|| p.features(&self.tree, k, data)).map_err(to_py)
    }

    /// Run counters, or None for a reloaded tree.
    fn stats(&self) -> Option<HashMap<&'static str, u64>> {
        self.stats.map(|s| {
            HashMap::from([
                ("merges", s.merges as u64),
                ("cost_evaluations", s.cost_evaluations),
                ("infinite_costs", s.infinite_costs),
                ("heap_pushes", s.heap_pushes),
                ("stale_pops", s.stale_pops),
                ("peak_candidates", s.peak_candidates as u64),
            ])
        })
    }

    fn __len__(&self) -> usize {
        self.tree.nodes().len()
    }

    fn __repr__(&self) -> String {
        format!("Tree(model={:?}, leaves={})", self.tree.model(), self.tree.num_leaves())
    }
}

fn run(py: Python<'_>, data: Dataset, model: &str, smoothing: &str, bandwidth_scale: f64, strategy: &str) -> PyResult<PyTree> {
    let kind: ModelKind = parse(model)?;
    let smoothing: SmoothingChoice = parse(smoothing)?;
    let strategy: Strategy = parse(strategy)?;
    py.detach(|| {
        let p = Pipeline::new(kind, &data, smoothing, bandwidth_scale)?;
        let (tree, stats) = p.cluster(&data, strategy)?;
        Ok(PyTree { tree, context: Some((p, data)), stats: Some(stats) })
    })
    .map_err(to_py)
}

/// Cluster real vectors under kmeans, l1, gaussian-full or gaussian-diag.
#[pyfunction]
#[pyo3(signature = (points, model = "kmeans", smoothing = "auto", bandwidth_scale = 1.0, strategy = "heap"))]
fn cluster_points(
    py: Python<'_>,
    points: Vec<Vec<f64>>,
    model: &str,
    smoothing: &str,
    bandwidth_scale: f64,
    strategy: &str,
) -> PyResult<PyTree> {
    run(py, Dataset::Points(points), model, smoothing, bandwidth_scale, strategy)
}

/// Cluster documents given as `{token: count}` dicts under the multinomial
/// model. Returns the tree and the sorted vocabulary.
#[pyfunction]
#[pyo3(signature = (docs, smoothing = "auto", strategy = "heap"))]
fn cluster_documents(
    py: Python<'_>,
    docs: Vec<HashMap<String, u32>>,
    smoothing: &str,
    strategy: &str,
) -> PyResult<(PyTree, Vec<String>)> {
    let vocab: Vec<String> = docs.iter().flat_map(|d| d.keys().cloned()).collect::<BTreeSet<_>>().into_iter().collect();
    let index: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let docs = docs
        .iter()
        .map(|d| Document::from_counts(d.iter().map(|(w, c)| (index[w.as_str()], *c))))
        .collect();
    let data = Dataset::Documents { docs, vocab: vocab.clone() };
    Ok((run(py, data, "multinomial", smoothing, 1.0, strategy)?, vocab))
}

fn model_for(name: &str, stat_len: usize) -> PyResult<Box<dyn DivergenceModel>> {
    Ok(match name {
        "squared-euclidean" | "kmeans" => Box::new(SquaredEuclidean::new(stat_len)),
        "l1" => Box::new(L1::new(stat_len)),
        other => Box::new(expfam_for(parse(other)?, stat_len)?),
    })
}

fn expfam_for(family: Family, stat_len: usize) -> PyResult<ExpFamModel> {
    let d = family
        .data_dim_for(stat_len)
        .ok_or_else(|| PyValueError::new_err(format!("no {} statistic has length {stat_len}", family.tag())))?;
    Ok(ExpFamModel::new(family, d))
}

fn stats(x: Vec<f64>, y: Vec<f64>) -> PyResult<(StatVec, StatVec)> {
    Ok((StatVec::new(x).map_err(to_py)?, StatVec::new(y).map_err(to_py)?))
}

/// Bregman divergence B(x, y) for a named model, on statistic vectors.
#[pyfunction]
fn divergence(model: &str, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    let m = model_for(model, x.len())?;
    let (x, y) = stats(x, y)?;
    m.divergence(&x, &y).map_err(to_py)
}

/// KL(p_a ‖ p_b) for an exponential family given mean statistics.
#[pyfunction]
fn kl(family: &str, a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    let m = expfam_for(parse(family)?, a.len())?;
    let (a, b) = stats(a, b)?;
    m.kl(&a, &b).map_err(to_py)
}

#[pymodule]
fn bregtree_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTree>()?;
    m.add_function(wrap_pyfunction!(cluster_points, m)?)?;
    m.add_function(wrap_pyfunction!(cluster_documents, m)?)?;
    m.add_function(wrap_pyfunction!(divergence, m)?)?;
    m.add_function(wrap_pyfunction!(kl, m)?)?;
    Ok(())
}
