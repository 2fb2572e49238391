use proptest::prelude::*;
use stit_core::functionals::{boundary_mass, vertex_count};
use stit_core::geometry::{ConvexPolytope, CuboidRegion, Dim, GeometryError, Hyperplane, Vector};
use stit_core::measure::HyperplaneMeasure;
use stit_core::mixing::{beta_exact, beta_variational, JointPartitionDistribution};
use stit_core::oracle::beta_coarsening_sup;
use stit_core::stit::{parse_tessellation, simulate, SimulationConfig, TessellationRecord};

fn dim_of(three: bool) -> Dim {
    if three { Dim::Three } else { Dim::Two }
}

fn iso(dim: Dim) -> HyperplaneMeasure {
    HyperplaneMeasure::isotropic(dim, 1.0).unwrap()
}

fn direction(three: bool, a: f64, b: f64) -> Vector {
    if three {
        let z = b.cos();
        let s = b.sin();
        Vector::new3(s * a.cos(), s * a.sin(), z)
    } else {
        Vector::from_angle(a)
    }
}

fn joint() -> impl Strategy<Value = JointPartitionDistribution> {
    (1usize..=5, 1usize..=5)
        .prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(0.0f64..1.0, c), r))
        .prop_filter_map("positive total", |m| {
            let total: f64 = m.iter().flatten().sum();
            (total > 1e-6).then(|| {
                JointPartitionDistribution::new(m.iter().map(|row| row.iter().map(|x| x / total).collect()).collect())
                    .unwrap()
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn split_conserves_volume_and_boundary(
        three in any::<bool>(),
        half in 0.2f64..3.0,
        a in 0.0f64..std::f64::consts::TAU,
        b in 0.0f64..std::f64::consts::PI,
        frac in 0.01f64..0.99,
    ) {
        let dim = dim_of(three);
        let p = ConvexPolytope::cuboid(&CuboidRegion::centered_cube(dim, half).unwrap());
        let u = direction(three, a, b);
        let lo = -p.support_value(&(u * -1.0));
        let hi = p.support_value(&u);
        let h = Hyperplane::new(u, lo + frac * (hi - lo)).unwrap();
        match p.split(&h) {
            Ok(s) => {
                let vol = s.lower.volume() + s.upper.volume();
                prop_assert!((vol - p.volume()).abs() <= 1e-9 * p.volume());
                let bnd = s.lower.boundary_measure() + s.upper.boundary_measure();
                let expected = p.boundary_measure() + 2.0 * s.facet.measure();
                prop_assert!((bnd - expected).abs() <= 1e-9 * expected);
            }
            Err(GeometryError::DegenerateSplit { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn hitting_mass_is_translation_invariant(
        three in any::<bool>(),
        half in 0.2f64..3.0,
        shift in prop::array::uniform3(-50.0f64..50.0),
    ) {
        let dim = dim_of(three);
        let m = iso(dim);
        let v = CuboidRegion::centered_cube(dim, half).unwrap();
        let a = if three { Vector::new3(shift[0], shift[1], shift[2]) } else { Vector::new2(shift[0], shift[1]) };
        let p = ConvexPolytope::cuboid(&v);
        let moved = ConvexPolytope::cuboid(&v.translate(a));
        let (x, y) = (m.hitting_mass(&p), m.hitting_mass(&moved));
        prop_assert!((x - y).abs() <= 1e-12 * x);
    }

    #[test]
    fn beta_forms_agree_and_coarsening_never_increases(j in joint(), seed in any::<u64>()) {
        let b = beta_exact(&j);
        prop_assert!((0.0..=1.0).contains(&b));
        prop_assert!((beta_variational(&j) - b).abs() <= 1e-12);
        prop_assert!((beta_coarsening_sup(&j) - b).abs() <= 1e-12);
        let (r, c) = j.shape();
        let rows: Vec<usize> = (0..r).map(|i| ((seed >> i) & 1) as usize).collect();
        let cols: Vec<usize> = (0..c).map(|i| ((seed >> (16 + i)) & 1) as usize).collect();
        prop_assert!(beta_exact(&j.coarsen(&rows, &cols)) <= b + 1e-12);
    }

    #[test]
    fn product_laws_have_zero_beta(p in prop::collection::vec(0.01f64..1.0, 1..6), q in prop::collection::vec(0.01f64..1.0, 1..6)) {
        let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
        let p: Vec<f64> = p.iter().map(|x| x / sp).collect();
        let q: Vec<f64> = q.iter().map(|x| x / sq).collect();
        let j = JointPartitionDistribution::independent(&p, &q).unwrap();
        prop_assert!(beta_exact(&j) <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn text_format_round_trips(three in any::<bool>(), seed in any::<u64>(), t in 0.1f64..3.0) {
        let dim = dim_of(three);
        let y = simulate(&SimulationConfig::in_cuboid(&CuboidRegion::centered_cube(dim, 1.0).unwrap(), t, iso(dim), seed)).unwrap();
        let rec = TessellationRecord::from(&y);
        let back = parse_tessellation(&rec.to_text()).unwrap();
        prop_assert_eq!(back, rec);
    }

    #[test]
    fn longer_runs_extend_shorter_ones(seed in any::<u64>(), t in 0.1f64..2.0, extra in 0.0f64..2.0) {
        let w = CuboidRegion::centered_cube(Dim::Two, 1.0).unwrap();
        let short = simulate(&SimulationConfig::in_cuboid(&w, t, iso(Dim::Two), seed)).unwrap();
        let long = simulate(&SimulationConfig::in_cuboid(&w, t + extra, iso(Dim::Two), seed)).unwrap();
        prop_assert!(short.events().len() <= long.events().len());
        for (a, b) in short.events().iter().zip(long.events()) {
            prop_assert_eq!(a.time, b.time);
            prop_assert_eq!(a.cell_id, b.cell_id);
        }
    }

    #[test]
    fn translated_runs_match(seed in any::<u64>(), shift in prop::array::uniform2(-5.0f64..5.0)) {
        let w = CuboidRegion::centered_cube(Dim::Two, 1.0).unwrap();
        let a = Vector::new2(shift[0], shift[1]);
        let here = simulate(&SimulationConfig::in_cuboid(&w, 2.0, iso(Dim::Two), seed)).unwrap().translate(a);
        let there = simulate(&SimulationConfig::in_cuboid(&w.translate(a), 2.0, iso(Dim::Two), seed)).unwrap();
        prop_assert_eq!(here.cell_count(), there.cell_count());
        for (x, y) in here.cells().iter().zip(there.cells()) {
            prop_assert!((x.polytope.volume() - y.polytope.volume()).abs() <= 1e-9);
        }
        let v = CuboidRegion::centered_cube(Dim::Two, 0.7).unwrap().translate(a);
        prop_assert!((boundary_mass(&here, &v).unwrap() - boundary_mass(&there, &v).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn additive_functionals_split_over_a_cut(seed in any::<u64>(), axis in 0usize..2, cut in -0.9f64..0.9) {
        let w = CuboidRegion::centered_cube(Dim::Two, 1.5).unwrap();
        let y = simulate(&SimulationConfig::in_cuboid(&w, 3.0, iso(Dim::Two), seed)).unwrap();
        let v = CuboidRegion::centered_cube(Dim::Two, 1.0).unwrap();
        let (l, r) = v.split_at(axis, cut).unwrap();
        prop_assert_eq!(vertex_count(&y, &v).unwrap(), vertex_count(&y, &l).unwrap() + vertex_count(&y, &r).unwrap());
        let whole = boundary_mass(&y, &v).unwrap();
        let sum = boundary_mass(&y, &l).unwrap() + boundary_mass(&y, &r).unwrap();
        prop_assert!((whole - sum).abs() <= 1e-12 * whole.max(1.0));
    }
}
