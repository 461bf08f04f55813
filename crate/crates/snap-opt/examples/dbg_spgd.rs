use snap_opt::bench;
use snap_opt::eigen::{sp_gd, SpGdConfig};
use snap_opt::poly::{FreeSpaceBasis, ACTIVE_TOL, RANK_TOL};
use rand::SeedableRng;

fn main() {
    let problem = bench::preset_problem("nmf-small", 1).unwrap();
    println!("L1={} L2={} radius={}", problem.l1(), problem.l2(), problem.lipschitz_radius);
    let x = bench::init_point(&problem, 1e-10, 1).unwrap();
    println!("|x| = {:.3e}, f = {:.6e}", x.norm(), problem.f(&x));
    let aset = problem.feasible.active_set(&x, ACTIVE_TOL).unwrap();
    println!("active = {}, free = {}", aset.active.len(), problem.dim() - aset.active.len());
    let basis = FreeSpaceBasis::new(&problem.feasible, &aset, RANK_TOL);
    println!("basis k = {}", basis.k());
    let cfg = SpGdConfig::practical(100, 1e-4, 1e-9, 5e-4, 1e-4, 0.1);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let r = sp_gd(&problem, &x, &basis, &cfg, &mut rng);
    println!("found={} evals={} curv_est={:.3e}", r.found, r.evals_used, r.curvature_estimate);
    if r.found {
        let hv = problem.hess_vec(&x, &r.direction);
        println!("rayleigh = {:.6e}", r.direction.dot(&hv));
    }
    // manual replay of the iteration with diagnostics
    let f0 = problem.f(&x);
    let q0 = basis.project(&problem.grad(&x));
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    use rand::Rng;
    let d = problem.dim();
    let g = snap_opt::Vector::from_fn(d, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
    let mut z = basis.project(&g);
    z *= cfg.script_r / z.norm();
    for tau in 1..=20 {
        let diff = basis.project(&problem.grad(&(&x + &z))) - &q0;
        z -= cfg.beta * diff;
        let descent = problem.f(&(&x + &z)) - f0 - q0.dot(&z);
        if tau <= 10 || tau % 5 == 0 {
            println!("tau {tau}: |z| = {:.3e}, descent = {:+.6e}", z.norm(), descent);
        }
    }
}
