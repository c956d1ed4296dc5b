//! Designs a waveform for a small scenario and prints the objective before
//! and after. Run with `cargo run --release -p umwave --example design_small`.

use umwave::manifold::random_point;
use umwave::objective::objective;
use umwave::{solve, Scenario, ScenarioParams, SolverConfig, TermWeights};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = Scenario::new(ScenarioParams {
        antennas: 4,
        samples: 16,
        d_over_lambda: 0.5,
        grid_step_deg: 0.5,
        desired_angles_deg: vec![-30.0, 10.0],
        comm_angle_deg: 45.0,
        delays: (0..4).collect(),
        mainlobe_halfwidth_deg: Some(2.0),
        weights: TermWeights::default(),
        include_endpoints: false,
    })?;
    let x0 = random_point(16, 4, 7)?;
    let config = SolverConfig { max_iters: 300, ..Default::default() };
    let solution = solve(&x0, &scenario, &config)?;

    let before = objective(&x0, &scenario)?;
    let after = objective(&solution.x, &scenario)?;
    println!("status {:?} after {} steps", solution.trace.status, solution.trace.accepted_steps());
    println!("g {:.4e} -> {:.4e}", before.g_value, after.g_value);
    println!("h {:.4e} -> {:.4e}", before.h_value, after.h_value);
    println!("total {:.4e} -> {:.4e}", before.total, after.total);
    Ok(())
}
