use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::Config;

use isingq::dirac::{crosscheck_sector, dirac_evolve, DiracField, DiracScheme, HamiltonianSpec};
use isingq::ensemble::{evolve, ClassicalWaveFunction};
use isingq::evolution::{EvolutionGenerator, Method};
use isingq::grassmann::GrassmannElement;
use isingq::grid::Grid;
use isingq::lattice::{build_generator_sector, ExternalPotential, LatticeGeometry, ModelParams};
use isingq::observables::{
    antisymmetry_defect, expect, expectation_flow, extract_two_particle, two_particle_state, DiagonalObservable, ModeContext,
    ObservableSpec, SectorState,
};
use isingq::grassmann::VariableLayout;
use isingq::schrodinger::{schrodinger_evolve, KineticMode, SchrodingerField, SchrodingerScheme, SchrodingerSpec};
use isingq::sectors::{binomial, SectorBasis, DEFAULT_SECTOR_LIMIT};
use isingq::sparse::SparseMatrix;

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn nonzero_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![-1.0..-0.01, 0.01..1.0f64], n)
}

fn homogeneous(n: usize, odd: bool) -> impl Strategy<Value = GrassmannElement> {
    prop::collection::vec((0u32..1 << n, -2.0..2.0f64), 1..6).prop_map(move |terms| {
        let terms = terms.into_iter().map(|(m, c)| if (m.count_ones() % 2 == 1) == odd { (m, c) } else { (m ^ 1, c) });
        GrassmannElement::from_terms(n, terms).unwrap()
    })
}

fn close(a: &GrassmannElement, b: &GrassmannElement, tol: f64) -> bool {
    a.sub(b).unwrap().terms().all(|(_, c)| c.abs() <= tol)
}

fn antisymmetric_generator(n: usize, entries: Vec<(usize, usize, f64)>) -> EvolutionGenerator {
    let trip = entries.into_iter().filter(|(i, j, _)| i % n != j % n).flat_map(|(i, j, v)| [(i % n, j % n, v), (j % n, i % n, -v)]);
    EvolutionGenerator::new(SparseMatrix::from_triplets(n, n, trip)).unwrap()
}

fn dirac_chain(n: usize, m: f64, e: f64, a0: Vec<f64>) -> (LatticeGeometry, ModelParams) {
    (LatticeGeometry::chain(n, 0.25, 0.1).unwrap(), ModelParams::dirac(m, e, ExternalPotential::scalar(a0)))
}

proptest! {
    #![proptest_config(Config::with_cases(100))]

    #[test]
    fn wavefunction_round_trip(q in nonzero_vec(64)) {
        let q = unit(q);
        let g = GrassmannElement::from_wavefunction(6, &q).unwrap();
        let back = g.wavefunction_of().unwrap();
        let g2 = GrassmannElement::from_wavefunction(6, back.amplitudes()).unwrap();
        prop_assert_eq!(g, g2);
    }

    #[test]
    fn split_join_round_trip(q in nonzero_vec(12)) {
        let q = ClassicalWaveFunction::new(unit(q)).unwrap();
        let (p, s) = q.split();
        let back = ClassicalWaveFunction::join(&p, &s).unwrap();
        for (a, b) in q.amplitudes().iter().zip(back.amplitudes()) {
            prop_assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn odd_elements_anticommute((a, b) in (2usize..=12).prop_flat_map(|n| (homogeneous(n, true), homogeneous(n, true)))) {
        let ab = a.multiply(&b).unwrap();
        let ba = b.multiply(&a).unwrap();
        prop_assert!(close(&ab, &ba.scale(-1.0), 1e-12));
    }

    #[test]
    fn leibniz_rule(
        (g, h, b, odd_g) in (2usize..=10, any::<bool>(), any::<bool>())
            .prop_flat_map(|(n, og, oh)| (homogeneous(n, og), homogeneous(n, oh), 0..n, Just(og)))
    ) {
        let lhs = g.multiply(&h).unwrap().derive(b).unwrap();
        let sign = if odd_g { -1.0 } else { 1.0 };
        let rhs = g.derive(b).unwrap().multiply(&h).unwrap().add(&g.multiply(&h.derive(b).unwrap()).unwrap().scale(sign)).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn generators_are_nilpotent(n in 1usize..=24, b in 0usize..24) {
        let b = b % n;
        let psi = GrassmannElement::generator(n, b).unwrap();
        prop_assert!(psi.multiply(&psi).unwrap().is_zero());
    }

    #[test]
    fn rank_unrank_bijection(modes in 1usize..=20, m in 0usize..=20, r in any::<prop::sample::Index>()) {
        let m = m.min(modes);
        let basis = SectorBasis::new(modes, m, DEFAULT_SECTOR_LIMIT).unwrap();
        prop_assert_eq!(basis.dim() as u128, binomial(modes, m));
        let idx = r.index(basis.dim());
        let occ = basis.unrank(idx);
        prop_assert!(occ.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(basis.rank(&occ), idx);
        prop_assert_eq!(basis.from_mask(basis.mask_of(&occ)), Some(idx));
        if idx + 1 < basis.dim() {
            let colex = |v: &[usize]| v.iter().rev().copied().collect::<Vec<_>>();
            prop_assert!(colex(&basis.unrank(idx + 1)) > colex(&occ));
        }
    }

    #[test]
    fn evolution_preserves_norm_and_reverses(n in 2usize..=40, entries in prop::collection::vec((0usize..40, 0usize..40, -1.0..1.0f64), 1..120), q in prop::collection::vec(-1.0..1.0f64, 40), t in -20.0..20.0f64) {
        let k = antisymmetric_generator(n, entries);
        let q0 = ClassicalWaveFunction::normalized(q[..n].to_vec()).unwrap();
        let qt = evolve(&q0, &k, t, Method::Exact).unwrap();
        prop_assert!((qt.norm() - 1.0).abs() < 1e-9);
        let back = evolve(&qt, &k, -t, Method::Exact).unwrap();
        for (a, b) in q0.amplitudes().iter().zip(back.amplitudes()) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn splitting_matches_exponential(entries in prop::collection::vec((0usize..16, 0usize..16, -1.0..1.0f64), 1..60), q in prop::collection::vec(-1.0..1.0f64, 16)) {
        let k = antisymmetric_generator(16, entries);
        let q0 = ClassicalWaveFunction::normalized(q).unwrap();
        let exact = evolve(&q0, &k, 1.0, Method::Exact).unwrap();
        let split = evolve(&q0, &k, 1.0, Method::Splitting { tol: 1e-10 }).unwrap();
        prop_assert!((split.norm() - 1.0).abs() < 1e-10);
        for (a, b) in exact.amplitudes().iter().zip(split.amplitudes()) {
            prop_assert!((a - b).abs() < 1e-8);
        }
    }
}

proptest! {
    #![proptest_config(Config::with_cases(50))]

    #[test]
    fn sector_matches_direct_dirac(
        re in prop::collection::vec(-1.0..1.0f64, 64),
        im in prop::collection::vec(-1.0..1.0f64, 64),
        m in 0.0..2.0f64,
        e in -1.5..1.5f64,
        a0 in prop::collection::vec(-0.8..0.8f64, 16),
        t in 0.1..2.0f64,
    ) {
        let (geom, params) = dirac_chain(16, m, e, a0);
        let data = re.iter().zip(&im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let phi = DiracField::normalized(geom.grid, data).unwrap();
        prop_assert!(crosscheck_sector(&phi, &params, &geom, t).unwrap() < 1e-8);
    }

    #[test]
    fn dirac_propagation_is_unitary(
        re in prop::collection::vec(-1.0..1.0f64, 128),
        m in 0.0..3.0f64,
        a0 in prop::collection::vec(-1.0..1.0f64, 32),
        t in 0.0..5.0f64,
    ) {
        let grid = Grid::line(32, 0.5).unwrap();
        let data = re.chunks(2).map(|c| Complex64::new(c[0], c[1])).chain(std::iter::repeat(Complex64::new(0.1, 0.0)).take(64)).collect();
        let phi = DiracField::normalized(grid, data).unwrap();
        let spec = HamiltonianSpec { mass: m, coupling: 1.0, potential: ExternalPotential::scalar(a0), ..HamiltonianSpec::free(0.0) };
        let exact = dirac_evolve(&phi, &spec, t, DiracScheme::Exact).unwrap();
        let split = dirac_evolve(&phi, &spec, t, DiracScheme::SplitStep { dt: 0.01 }).unwrap();
        prop_assert!((exact.norm_sq() - 1.0).abs() < 1e-9);
        prop_assert!((split.norm_sq() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn two_particle_antisymmetry_survives_evolution(
        q in prop::collection::vec(-1.0..1.0f64, 256),
        m in 0.0..2.0f64,
        a0 in prop::collection::vec(-0.5..0.5f64, 8),
    ) {
        let geom = LatticeGeometry::chain(8, 0.5, 0.5).unwrap();
        let params = ModelParams::dirac(m, 0.7, ExternalPotential::scalar(a0));
        let (basis, k) = build_generator_sector(&params, &geom, 2, DEFAULT_SECTOR_LIMIT).unwrap();
        let n = basis.modes();
        let q = DMatrix::from_fn(n, n, |i, j| q[(i * 37 + j * 11) % 256]);
        let g2 = two_particle_state(&q, DEFAULT_SECTOR_LIMIT).unwrap();
        let qt = evolve(&g2.wavefunction().unwrap(), &k, 1.0, Method::Auto { tol: 1e-10 }).unwrap();
        let st = SectorState::new(basis, qt.into_amplitudes()).unwrap();
        prop_assert!(antisymmetry_defect(&extract_two_particle(&st).unwrap()) < 1e-12);
    }

    #[test]
    fn observable_rules_agree_and_total_number_is_conserved(
        q in prop::collection::vec(-1.0..1.0f64, 780),
        sites in prop::collection::vec(any::<bool>(), 5),
        m in 1usize..=2,
    ) {
        let geom = LatticeGeometry::chain(5, 0.5, 0.5).unwrap();
        let params = ModelParams::dirac(0.4, 0.3, ExternalPotential::constant(5, 0.2));
        let ctx = ModeContext::new(VariableLayout::new(5, 2).unwrap(), geom.grid).unwrap();
        let (basis, k) = build_generator_sector(&params, &geom, m, DEFAULT_SECTOR_LIMIT).unwrap();
        let q = unit(q[..basis.dim()].to_vec());
        let qw = ClassicalWaveFunction::new(q.clone()).unwrap();
        let r: Vec<usize> = (0..5).filter(|&s| sites[s]).collect();
        for spec in [ObservableSpec::Total, ObservableSpec::Interval { sites: r }, ObservableSpec::Position { axis: 2 }, ObservableSpec::LocalNumber { site: 3 }] {
            let a = DiagonalObservable::on_sector(&spec, &basis, &ctx).unwrap();
            prop_assert!(expect(&a, &qw).unwrap().discrepancy() < 1e-12);
            let integral = matches!(spec, ObservableSpec::Position { .. }) || a.spectrum().iter().all(|v| v.fract() == 0.0);
            prop_assert!(integral);
        }
        let total = DiagonalObservable::on_sector(&ObservableSpec::Total, &basis, &ctx).unwrap();
        prop_assert!(expectation_flow(&total, &q, &k).unwrap().abs() < 1e-13);
    }

    #[test]
    fn schrodinger_schemes_are_unitary(
        v in prop::collection::vec(-2.0..2.0f64, 64),
        x0 in -3.0..3.0f64,
        k0 in -2.0..2.0f64,
        cn in any::<bool>(),
    ) {
        let grid = Grid::line(64, 0.2).unwrap();
        let spec = SchrodingerSpec::with_potential(1.0, v);
        let psi = SchrodingerField::gaussian(grid, [0.0, 0.0, x0], 1.0, [0.0, 0.0, k0]).unwrap();
        let scheme = if cn { SchrodingerScheme::CrankNicolson { dt: 0.01 } } else { SchrodingerScheme::SplitStep { dt: 0.005, kinetic: KineticMode::Spectral } };
        let out = schrodinger_evolve(&psi, &spec, 1.0, scheme).unwrap();
        prop_assert!((out.norm_sq() - 1.0).abs() < 1e-9);
    }
}
