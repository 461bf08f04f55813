use snap_opt::bench::{self, Algo};
use snap_opt::poly::{FreeSpaceBasis, RANK_TOL};
use snap_opt::stationarity::restricted_min_eig;

fn main() {
    let mut spec = bench::preset_spec("nmf-small").unwrap();
    spec.overrides.push((None, "alpha_pi".into(), "2e-4".into()));
    for seed in [1u64, 2] {
        for algo in [Algo::Pgd, Algo::SnapPlus] {
            let run = bench::run_cell(&spec, algo, seed).unwrap();
            let p = &run.problem;
            let x = &run.result.x_final;
            let aset = p.feasible.active_set(x, run.cfg.active_tol).unwrap();
            let basis = FreeSpaceBasis::new(&p.feasible, &aset, RANK_TOL);
            let eig = restricted_min_eig(p, &basis, x).unwrap();
            let gap = run.result.trace.last().unwrap().fosp1_gap;
            println!(
                "{} seed {}: f={:.4e} gap={:.3e} active={} free={} min_eig={:?}",
                algo.as_str(), seed, run.result.f_final, gap,
                aset.active.len(), basis.k(), eig.map(|(l, _)| l)
            );
        }
    }
}
