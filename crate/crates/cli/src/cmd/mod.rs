use serde_json::{Map, Value};

use crate::input::InputResult;
use crate::output::Report;
use crate::{Cli, Command, GeometryAction, HybridAction, ModelAction, RealmaAction};

mod compare;
mod geometry;
mod hybrid;
mod model;
mod realma;

pub fn run(cli: &Cli) -> InputResult<Report> {
    match &cli.command {
        Command::Model { action: ModelAction::Validate { config } } => model::validate(cli, config),
        Command::Model { action: ModelAction::Skeleton { config } } => model::skeleton(cli, config),
        Command::Namma { config } => model::namma(cli, config),
        Command::Realma { action: RealmaAction::Solve { config, grid, scheme, max_iter } } => {
            realma::solve(cli, config, *grid, *scheme, *max_iter)
        }
        Command::Realma { action: RealmaAction::Measure { nodes, oracle } } => realma::measure(cli, nodes, *oracle),
        Command::Compare(args) => {
            let (mode, config) = args.resolve()?;
            compare::run(cli, mode, &config)
        }
        Command::Hybrid { action: HybridAction::Pushforward { local, level } } => hybrid::pushforward(cli, local, *level),
        Command::Hybrid { action: HybridAction::Growth { local } } => hybrid::growth(cli, local),
        Command::Geometry { action } => match action {
            GeometryAction::SlagCheck { hessian, scale, base } => geometry::slag_check(cli, hessian, *scale, base.as_deref()),
            GeometryAction::Calabi { n, points, lo, hi, finite_difference } => {
                geometry::calabi(cli, *n, *points, *lo, *hi, *finite_difference)
            }
            GeometryAction::Gcalabi { m, n, scales, p, q, b } => geometry::gcalabi(cli, *m, *n, scales, p, q, b.as_deref()),
        },
    }
}

/// Global flags plus the resolved tolerance of the command.
fn base_config(cli: &Cli, tol: f64) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("seed".into(), cli.seed.into());
    m.insert("tol".into(), tol.into());
    m
}

fn tolerance(cli: &Cli, default: f64) -> InputResult<f64> {
    match cli.tol {
        Some(t) if !(t.is_finite() && t >= 0.0) => Err(format!("--tol must be a nonnegative number, got {t}")),
        Some(t) => Ok(t),
        None => Ok(default),
    }
}
