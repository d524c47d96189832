use rcfd_sim::{build_grid, build_random, run, Protocol, SimConfig};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn summarize(name: &str, label: &str, gs: &[f64], ds: &[f64], js: &[f64], col: u64, intf: u64) {
    let n = gs.len() as f64;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
    println!(
        "{label} {name:>10}: gamma={:.4} delta={:.4} jain={:.4} col={col} intf={intf}",
        mean(gs),
        mean(ds),
        mean(js)
    );
}

#[test]
fn scratch_probe() {
    let grid3 = build_grid(3, 100.0).unwrap();
    for (label, mk) in [
        ("caseI ", SimConfig::grid_case_i as fn(Protocol) -> SimConfig),
        ("caseII", SimConfig::grid_case_ii as fn(Protocol) -> SimConfig),
    ] {
        for p in Protocol::ALL {
            let (mut gs, mut ds, mut js) = (vec![], vec![], vec![]);
            let (mut col, mut intf) = (0, 0);
            for seed in 0..5u64 {
                let mut cfg = mk(p);
                cfg.seed = seed;
                let m = run(&grid3, &cfg).unwrap();
                gs.push(m.gamma);
                ds.push(m.delta);
                js.push(m.jain);
                col += m.data_collisions;
                intf += m.data_interference;
            }
            summarize(p.name(), label, &gs, &ds, &js, col, intf);
        }
    }
    for p in Protocol::ALL {
        let (mut gs, mut ds, mut js) = (vec![], vec![], vec![]);
        let (mut col, mut intf) = (0, 0);
        for seed in 0..10u64 {
            let mut trng = ChaCha12Rng::seed_from_u64(seed);
            let topo = build_random(30, 500.0, 60.0, &mut trng).unwrap();
            let mut cfg = SimConfig::random_scenario(p);
            cfg.seed = seed;
            let m = run(&topo, &cfg).unwrap();
            gs.push(m.gamma);
            ds.push(m.delta);
            js.push(m.jain);
            col += m.data_collisions;
            intf += m.data_interference;
        }
        summarize(p.name(), "random", &gs, &ds, &js, col, intf);
    }
}
