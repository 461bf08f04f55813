use snap_opt::bench::{self, Algo};
use snap_opt::poly::{FreeSpaceBasis, RANK_TOL};
use snap_opt::stationarity::restricted_min_eig;

fn main() {
    let mut spec = bench::preset_spec("nmf-small").unwrap();
    for (k, v) in [
        ("alpha_pi", "5e-4"), ("eps_g", "1.0"), ("r_th", "600"),
        ("spgd_t", "4000"), ("spgd_f", "1e-11"), ("beta", "3e-3"),
    ] {
        spec.overrides.push((None, k.into(), v.into()));
    }
    for seed in [1u64, 2, 5] {
        let run = bench::run_cell(&spec, Algo::SnapPlus, seed).unwrap();
        let p = &run.problem;
        let x = &run.result.x_final;
        let aset = p.feasible.active_set(x, run.cfg.active_tol).unwrap();
        let basis = FreeSpaceBasis::new(&p.feasible, &aset, RANK_TOL);
        let eig = restricted_min_eig(p, &basis, x).unwrap();
        let gap = run.result.trace.last().unwrap().fosp1_gap;
        println!(
            "seed {}: f={:.4e} gap={:.3e} free={} min_eig={:?}",
            seed, run.result.f_final, gap, basis.k(), eig.map(|(l, _)| l)
        );
    }
}
