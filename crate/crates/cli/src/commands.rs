use std::path::{Path, PathBuf};

use sparse_pce::benchmarks::{reduce_inputs, sar_scenario};
use sparse_pce::training::ModelDocument;
use sparse_pce::{
    outer_loocv, replication_study, sobol_indices, train, Benchmark, ExperimentalDesign, InputSpace, ReplicationStudy,
    SparsePceModel,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::tables::{read_numeric, read_scenario, write_file, write_numeric, write_scenario};

/// Files written by a subcommand, relative to the output directory.
pub type Outputs = Vec<PathBuf>;

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T, outputs: &mut Outputs) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::data(e.to_string()))?;
    text.push('\n');
    write_file(&dir.join(name), text.as_bytes())?;
    outputs.push(name.into());
    Ok(())
}

fn names_with_response(space: &InputSpace) -> Vec<String> {
    let mut names = space.names();
    names.push("y".into());
    names
}

fn design_rows(ed: &ExperimentalDesign) -> impl Iterator<Item = Vec<f64>> + '_ {
    (0..ed.len()).map(|i| {
        let mut row: Vec<f64> = ed.inputs().row(i).iter().copied().collect();
        row.push(ed.responses()[i]);
        row
    })
}

/// The experimental design named by the config: a data file, or `n`
/// fresh samples of a benchmark.
fn load_design(cfg: &RunConfig) -> CliResult<(ExperimentalDesign, InputSpace)> {
    let benchmark = cfg.benchmark()?;
    if let Some(path) = &cfg.data {
        let space = match (cfg.input_space()?, benchmark) {
            (Some(space), _) => space,
            (None, Some(b)) => b.input_space(),
            (None, None) => return Err(CliError::config("a data file needs \"input_space\" or \"problem\"")),
        };
        let ed = read_numeric(path)?.design(space.dimension(), path)?;
        return Ok((ed, space));
    }
    let benchmark = benchmark.ok_or_else(|| CliError::config("either \"data\" or \"problem\" is required"))?;
    let n = cfg.require(cfg.n, "n")?;
    match benchmark {
        Benchmark::SarSynthetic(mode) => Ok(reduce_inputs(&sar_scenario(n, cfg.seed())?, mode)?),
        b => Ok((b.sample(n, cfg.seed())?, b.input_space())),
    }
}

pub fn train_cmd(cfg: &RunConfig, dir: &Path) -> CliResult<Outputs> {
    let (ed, space) = load_design(cfg)?;
    let model = train(&ed, &space, &cfg.train_config()?)?;
    let mut outputs = Vec::new();
    write_json(dir, "model.json", &model.to_document(), &mut outputs)?;
    write_json(dir, "diagnostics.json", model.diagnostics(), &mut outputs)?;
    Ok(outputs)
}

pub fn ocv_cmd(cfg: &RunConfig, dir: &Path) -> CliResult<Outputs> {
    let (ed, space) = load_design(cfg)?;
    let report = outer_loocv(&ed, &space, &cfg.train_config()?)?;
    let mut outputs = Vec::new();
    write_json(dir, "ocv.json", &report, &mut outputs)?;
    Ok(outputs)
}

pub fn replicate_cmd(cfg: &RunConfig, dir: &Path) -> CliResult<Outputs> {
    let mut sizes = cfg.sizes.clone().ok_or_else(|| CliError::config("\"sizes\" is required"))?;
    sizes.sort_unstable();
    sizes.dedup();
    let study = ReplicationStudy {
        benchmark: cfg.require_benchmark()?,
        sizes,
        replications: cfg.require(cfg.n_rep, "n_rep")?,
        train: cfg.train_config()?,
        test_size: cfg.require(cfg.n_test, "n_test")?,
        master_seed: cfg.seed(),
        outer_cv: cfg.outer_cv.unwrap_or(true),
    };
    let table = replication_study(&study)?;
    let mut csv = Vec::new();
    table.write_csv(&mut csv).map_err(|e| CliError::data(e.to_string()))?;
    write_file(&dir.join("replication.csv"), &csv)?;
    Ok(vec!["replication.csv".into()])
}

pub fn load_model(path: &Path) -> CliResult<SparsePceModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read model {}: {e}", path.display())))?;
    let doc: ModelDocument = serde_json::from_str(&text)
        .map_err(|e| CliError::data(format!("invalid model {}: {e}", path.display())))?;
    SparsePceModel::from_document(doc).map_err(|e| CliError::from(e).context(path.display()))
}

pub fn sobol_cmd(cfg: &RunConfig, dir: &Path) -> CliResult<Outputs> {
    let path = cfg.model.as_deref().ok_or_else(|| CliError::config("\"model\" is required"))?;
    let model = load_model(path)?;
    let indices = sobol_indices(&model)?;
    let mut csv = Vec::new();
    indices.write_csv(&model.input_space().names(), &mut csv).map_err(|e| CliError::data(e.to_string()))?;
    write_file(&dir.join("sobol.csv"), &csv)?;
    Ok(vec!["sobol.csv".into()])
}

pub fn preprocess_cmd(cfg: &RunConfig, dir: &Path) -> CliResult<Outputs> {
    let path = cfg.scenario.as_deref().ok_or_else(|| CliError::config("\"scenario\" is required"))?;
    let mode = cfg.mode.ok_or_else(|| CliError::config("\"mode\" is required (six, four or two)"))?;
    let (ed, space) = reduce_inputs(&read_scenario(path)?, mode)?;
    write_numeric(&dir.join("reduced.csv"), &names_with_response(&space), design_rows(&ed))?;
    let mut outputs = vec!["reduced.csv".into()];
    write_json(dir, "input_space.json", &space, &mut outputs)?;
    Ok(outputs)
}

pub fn benchmark_eval_cmd(cfg: &RunConfig, dir: &Path) -> CliResult<Outputs> {
    let benchmark = cfg.require_benchmark()?;
    let space = benchmark.input_space();
    if let Some(path) = &cfg.points {
        let table = read_numeric(path)?;
        if table.header.len() != space.dimension() {
            return Err(CliError::data(format!(
                "{}: {} expects {} input columns, found {}",
                path.display(),
                benchmark.id(),
                space.dimension(),
                table.header.len()
            )));
        }
        let rows = table
            .rows
            .iter()
            .map(|r| {
                let mut row = r.clone();
                row.push(benchmark.evaluate(r)?);
                Ok(row)
            })
            .collect::<CliResult<Vec<_>>>()?;
        write_numeric(&dir.join("evaluated.csv"), &names_with_response(&space), rows)?;
        return Ok(vec!["evaluated.csv".into()]);
    }
    let n = cfg.require(cfg.n, "n")?;
    match benchmark {
        Benchmark::SarSynthetic(mode) => {
            let scenario = sar_scenario(n, cfg.seed())?;
            write_scenario(&dir.join("scenario.csv"), &scenario)?;
            let (ed, space) = reduce_inputs(&scenario, mode)?;
            write_numeric(&dir.join("design.csv"), &names_with_response(&space), design_rows(&ed))?;
            Ok(vec!["scenario.csv".into(), "design.csv".into()])
        }
        b => {
            let ed = b.sample(n, cfg.seed())?;
            write_numeric(&dir.join("design.csv"), &names_with_response(&space), design_rows(&ed))?;
            Ok(vec!["design.csv".into()])
        }
    }
}

