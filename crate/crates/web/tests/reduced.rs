use isingq::demos::rectangular_transmission;
use isingq_web::{double_slit, tunneling, two_state_curve};

#[test]
fn two_state_curve_layout() {
    let c = two_state_curve(1.3, 0.4, 2.0, 400).unwrap();
    assert_eq!(c.len(), 3 * 401);
    for s in c.chunks(3) {
        assert!((s[1] - (1.3 * s[0] + 0.4).cos().powi(2)).abs() < 1e-10);
        assert!(s[2] == 1.0 || s[2] == -1.0);
    }
    assert_eq!(c[2], 1.0);
    assert_eq!(c[3 * 400 + 2], 1.0);
    assert!(c.chunks(3).any(|s| s[2] == -1.0));
}

#[test]
fn reduced_tunneling_matches_plane_wave_transmission() {
    let r = tunneling(4.0, 1.0, 2.0).unwrap();
    assert!(r.norm_drift() < 1e-9);
    assert!((r.transmission() - r.analytic()).abs() / r.analytic() < 0.15);
    assert!((r.analytic() - rectangular_transmission(2.0, 4.0, 1.0, 1.0)).abs() < 1e-15);
    assert!((r.transmission() + r.reflection() - 1.0).abs() < 1e-9);
    assert_eq!(r.x().len(), r.density().len());
    let free = tunneling(0.0, 1.0, 2.0).unwrap();
    assert!((free.transmission() - 1.0).abs() < 1e-6);
}

#[test]
fn reduced_double_slit_shows_fringes_only_with_both_slits() {
    let both = double_slit("both").unwrap();
    let upper = double_slit("upper").unwrap();
    assert!(both.contrast() > 0.5, "contrast {}", both.contrast());
    assert!(both.maxima() >= 3);
    assert_eq!(upper.maxima(), 1);
    assert!(both.norm_drift() < 1e-9 && upper.norm_drift() < 1e-9);
    assert_eq!(both.density().len(), both.nx() * both.ny());
    assert_eq!(both.potential().len(), both.nx() * both.ny());
}
