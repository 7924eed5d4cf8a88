use boltzmann_spectral::*;


#[test]
fn probe_collide_symmetry() {
    let grid = VelocityGrid::new(8, 3.0).unwrap();
    let kernel = KernelSpec::maxwell_isotropic(1.0 / (4.0 * std::f64::consts::PI)).unwrap();
    let table = build_weight_table(&grid, &kernel, OperatorKind::Boltzmann).unwrap();
    let t = Transform::new(&grid);
    let f1 = maxwellian(0.6, [0.35, 0.2, -0.15], 0.55, &grid).unwrap();
    let f2 = maxwellian(0.4, [-0.3, -0.1, 0.25], 0.7, &grid).unwrap();
    let f: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| a + b).collect();
    let fhat = t.forward(&f);

    // fhat conjugate symmetry under physical mirror
    let mut worst_fhat = 0.0f64;
    for idx in 0..grid.len() {
        let k = grid.freq_k(idx);
        if let Some(m) = grid.index_of_freq_k([-k[0], -k[1], -k[2]]) {
            worst_fhat = worst_fhat.max((fhat[idx] - fhat[m].conj()).norm());
        }
    }
    println!("fhat mirror asymmetry: {worst_fhat:.3e}");

    // magnitude of fhat on the -N/2 planes (spectral tail)
    let mut plane_max = 0.0f64;
    let mut all_max = 0.0f64;
    for idx in 0..grid.len() {
        let k = grid.freq_k(idx);
        let mag = fhat[idx].norm();
        all_max = all_max.max(mag);
        if k.iter().any(|&c| c == -4) {
            plane_max = plane_max.max(mag);
        }
    }
    println!("fhat max {all_max:.3e}, -N/2 plane max {plane_max:.3e}");

    let qhat = collide(&fhat, &table, &grid).unwrap();
    let n = grid.n() as i64;
    let mirror = |k: [i64; 3]| -> [i64; 3] {
        std::array::from_fn(|a| if k[a] == -n / 2 { k[a] } else { -k[a] })
    };
    let mut worst_pair = 0.0f64;
    let mut worst_modn = 0.0f64;
    let mut qmax = 0.0f64;
    for idx in 0..grid.len() {
        let k = grid.freq_k(idx);
        qmax = qmax.max(qhat[idx].norm());
        if let Some(m) = grid.index_of_freq_k([-k[0], -k[1], -k[2]]) {
            worst_pair = worst_pair.max((qhat[idx] - qhat[m].conj()).norm());
        }
        let mm = grid.index_of_freq_k(mirror(k)).unwrap();
        worst_modn = worst_modn.max((qhat[idx] - qhat[mm].conj()).norm());
    }
    println!("qhat max {qmax:.3e}; physical-mirror asym {worst_pair:.3e}; modN asym {worst_modn:.3e}");

    let (q, res, scale) = t.inverse_with_residual(&qhat);
    println!("inverse residual {res:.3e} vs scale {scale:.3e} (rel {:.3e})", res / scale);
    let _ = q;
}

#[test]
fn probe_oracle_vs_spectral() {
    let n = 8;
    for (l, t1, t2, v) in [(5.0, 1.0, 1.0, 1.0), (3.5, 1.0, 1.2, 0.55), (3.0, 0.8, 0.9, 0.45)] {
        let grid = VelocityGrid::new(n, l).unwrap();
        let kernel = KernelSpec::maxwell_isotropic(1.0 / (4.0 * std::f64::consts::PI)).unwrap();
        let table = build_weight_table(&grid, &kernel, OperatorKind::Boltzmann).unwrap();
        let tr = Transform::new(&grid);
        let f1 = maxwellian(0.55, [v, 0.0, 0.0], t1, &grid).unwrap();
        let f2 = maxwellian(0.45, [-v, 0.1, 0.0], t2, &grid).unwrap();
        let f: Vec<f64> = f1.iter().zip(&f2).map(|(a, b)| a + b).collect();

        let qhat = collide(&tr.forward(&f), &table, &grid).unwrap();
        let (q_spec, res, scale) = tr.inverse_with_residual(&qhat);
        let q_or = direct_collision_oracle(&f, &kernel, &grid, SphereRule { polar: 24, azimuth: 48 }).unwrap();
        let num: f64 = q_spec
            .iter()
            .zip(&q_or)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let den: f64 = q_or.iter().map(|b| b * b).sum::<f64>().sqrt();
        println!(
            "L={l} T=({t1},{t2}) V={v}: rel l2 = {:.4}, residual rel {:.2e}",
            num / den,
            res / scale
        );
    }
}

#[test]
fn probe_oracle_equilibrium_scaling() {
    for (n, l, temp) in [(8usize, 5.0, 1.0), (8, 5.0, 2.5), (8, 4.0, 1.5), (12, 5.0, 1.0)] {
        let grid = VelocityGrid::new(n, l).unwrap();
        let kernel = KernelSpec::maxwell_isotropic(1.0 / (4.0 * std::f64::consts::PI)).unwrap();
        let f = maxwellian(1.0, [0.0; 3], temp, &grid).unwrap();
        let q = direct_collision_oracle(&f, &kernel, &grid, SphereRule { polar: 16, azimuth: 32 }).unwrap();
        let max_f = f.iter().fold(0.0f64, |a, &b| a.max(b));
        let max_q = q.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        println!("N={n} L={l} T={temp}: residual/maxf = {:.4e}", max_q / max_f);
    }
}

#[test]
fn probe_theta_oracle() {
    let cases = [
        (1.0, 1.0, 0.0, 1e-2, -0.63469804412650967),
        (2.0, 0.0, std::f64::consts::FRAC_PI_2, 1e-2, 2.5241143816892928),
        (4.0, 3.0, 1.5, 1e-2, 4.5361540818529388),
        (0.5, 2.5, -2.0, 1e-2, 1.0666293221841855),
        (3.0, 4.0, 5.0, 1e-2, -6.3558181470716935),
        (1.0, 1.0, 0.0, 1e-4, -0.63660062073402792),
    ];
    for (c1, c2, c3, eps, expected) in cases {
        let v = inner_theta_integral(c1, c2, c3, eps).unwrap();
        let o = boltzmann_spectral::weights::unsplit_theta_oracle(c1, c2, c3, eps).unwrap();
        println!(
            "c=({c1},{c2},{c3}) eps={eps}: split {v:.15} oracle {o:.15} expected {expected:.15} (do={:.2e}, dv={:.2e})",
            (o - expected).abs(),
            (v - expected).abs()
        );
    }
}
