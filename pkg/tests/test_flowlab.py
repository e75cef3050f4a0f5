import numpy as np
import pytest

from gcflow import fibration as F
from gcflow import flowlab as fl
from gcflow import geometry as geo
from gcflow.errors import FrameError
from gcflow.quat import qnormalize

E0, E1, E2, E3 = np.eye(4)

HOPF = F.FIXTURES["HOPF"]
CONF05 = F.FIXTURES["CONF05"]


def random_sm_point(rng):
    p = qnormalize(rng.normal(size=4))
    v = rng.normal(size=4)
    v -= np.dot(v, p) * p
    v /= np.linalg.norm(v)
    return fl.SMPoint(p, v)


def random_ker(rng, q):
    comps = []
    for _ in range(2):
        w = rng.normal(size=4)
        w -= np.dot(w, q.p) * q.p
        w -= np.dot(w, q.v) * q.v
        comps.append(w)
    return fl.KerAlphaVector(*comps)


class TestGeodesicFlow:
    def test_quarter_turn(self):
        q = fl.geodesic_flow(fl.SMPoint(E0, E1), np.pi / 2)
        assert np.allclose(q.p, E1, atol=1e-15)
        assert np.allclose(q.v, -E0, atol=1e-15)

    def test_identity_and_period(self, rng):
        q = random_sm_point(rng)
        q0 = fl.geodesic_flow(q, 0.0)
        assert np.allclose(q0.p, q.p) and np.allclose(q0.v, q.v)
        q1 = fl.geodesic_flow(q, 2 * np.pi)
        assert np.linalg.norm(q1.p - q.p) <= 1e-12
        assert np.linalg.norm(q1.v - q.v) <= 1e-12

    def test_group_law(self, rng):
        q = random_sm_point(rng)
        s, t = 0.7, 1.9
        a = fl.geodesic_flow(fl.geodesic_flow(q, s), t)
        b = fl.geodesic_flow(q, s + t)
        assert np.linalg.norm(a.p - b.p) <= 1e-12

    def test_rejects_non_unit_pair(self):
        with pytest.raises(FrameError):
            fl.SMPoint(E0, E0)


class TestDflow:
    def test_pure_horizontal_quarter_turn(self):
        q = fl.SMPoint(E0, E1)
        out = fl.dflow_ker_alpha(q, fl.KerAlphaVector(E2, np.zeros(4)), np.pi / 2)
        assert np.allclose(out.xi_h, 0.0, atol=1e-15)
        assert np.allclose(out.xi_v, -E2, atol=1e-15)

    def test_norm_conserved(self, rng):
        q = random_sm_point(rng)
        xi = random_ker(rng, q)
        for t in np.linspace(0.0, 2 * np.pi, 7):
            out = fl.dflow_ker_alpha(q, xi, t)
            assert abs(out.norm - xi.norm) <= 1e-12

    def test_spiral_reproduction(self):
        """xi = (e2, e3) generates the field cos(t) e2 + sin(t) e3."""
        q = fl.SMPoint(E0, E1)
        xi = fl.KerAlphaVector(E2, E3)
        for t in (0.4, 1.1, 2.9):
            out = fl.dflow_ker_alpha(q, xi, t)
            assert np.allclose(out.xi_h, np.cos(t) * E2 + np.sin(t) * E3, atol=1e-14)

    def test_cocycle(self, rng):
        q = random_sm_point(rng)
        xi = random_ker(rng, q)
        s, t = 0.8, 1.3
        a = fl.dflow_ker_alpha(fl.geodesic_flow(q, s), fl.dflow_ker_alpha(q, xi, s), t)
        b = fl.dflow_ker_alpha(q, xi, s + t)
        assert np.linalg.norm(a.xi_h - b.xi_h) <= 1e-12

    def test_rejects_invalid_components(self):
        q = fl.SMPoint(E0, E1)
        with pytest.raises(FrameError):
            fl.dflow_ker_alpha(q, fl.KerAlphaVector(E0, E2), 0.5)


class TestAlmostComplexStructures:
    def test_j_squares_to_minus_one(self, rng):
        q = random_sm_point(rng)
        xi = random_ker(rng, q)
        out = fl.apply_acs(q, fl.apply_acs(q, xi, "J"), "J")
        assert np.linalg.norm(out.xi_h + xi.xi_h) <= 1e-12
        assert np.linalg.norm(out.xi_v + xi.xi_v) <= 1e-12

    def test_jj_squares_to_minus_one(self, rng):
        q = random_sm_point(rng)
        xi = random_ker(rng, q)
        out = fl.apply_acs(q, fl.apply_acs(q, xi, "JJ"), "JJ")
        assert np.linalg.norm(out.xi_h + xi.xi_h) <= 1e-12
        assert np.linalg.norm(out.xi_v + xi.xi_v) <= 1e-12

    def test_jj_componentwise_example(self):
        q = fl.SMPoint(E0, E1)
        out = fl.apply_acs(q, fl.KerAlphaVector(E2, np.zeros(4)), "JJ")
        assert np.allclose(out.xi_h, E3)
        assert np.allclose(out.xi_v, 0.0)

    def test_both_preserve_norm(self, rng):
        q = random_sm_point(rng)
        xi = random_ker(rng, q)
        for which in ("J", "JJ"):
            out = fl.apply_acs(q, xi, which)
            assert abs(out.norm - xi.norm) <= 1e-12

    def test_unknown_structure(self, rng):
        q = random_sm_point(rng)
        with pytest.raises(ValueError):
            fl.apply_acs(q, random_ker(rng, q), "K")


class TestDalpha:
    def test_basis_pairing(self):
        q = fl.SMPoint(E0, E1)
        xi = fl.KerAlphaVector(E2, np.zeros(4))
        eta = fl.KerAlphaVector(np.zeros(4), E2)
        assert fl.dalpha(q, xi, eta) == 1.0

    def test_antisymmetry(self, rng):
        q = random_sm_point(rng)
        xi = random_ker(rng, q)
        eta = random_ker(rng, q)
        assert abs(fl.dalpha(q, xi, eta) + fl.dalpha(q, eta, xi)) <= 1e-14
        assert fl.dalpha(q, xi, xi) == 0.0

    def test_flow_invariance(self, rng):
        for _ in range(20):
            q = random_sm_point(rng)
            xi = random_ker(rng, q)
            eta = random_ker(rng, q)
            t = rng.uniform(0, 2 * np.pi)
            before = fl.dalpha(q, xi, eta)
            after = fl.dalpha(
                fl.geodesic_flow(q, t),
                fl.dflow_ker_alpha(q, xi, t),
                fl.dflow_ker_alpha(q, eta, t),
            )
            assert abs(after - before) <= 1e-10

    def test_pullback_matches_contact_form(self, scans):
        """Pairing of lifted perpendicular directions equals the contact
        2-form of the base field."""
        for name in ("HOPF", "CONF05"):
            scan = scans(name)
            fx = F.FIXTURES[name]
            for i in range(0, 40, 8):
                p = scan.array("p")[i]
                seed = scan.array("a")[i]
                q, xi1 = fl.push_forward(fx, p, scan.array("u1")[i], seed=seed)
                _, xi2 = fl.push_forward(fx, p, scan.array("u2")[i], seed=seed)
                val = fl.dalpha(q, xi1, xi2)
                assert abs(val - scan.array("dlambda_numeric")[i]) <= 1e-5


class TestMembership:
    def test_lift_is_member(self, scans):
        scan = scans("GEN")
        fx = F.FIXTURES["GEN"]
        for i in (0, 11, 23):
            p = scan.array("p")[i]
            seed = scan.array("a")[i]
            _, xi = fl.push_forward(fx, p, scan.array("u1")[i], seed=seed)
            assert fl.E_membership_defect(fx, p, xi, seed=seed) <= 1e-8

    def test_j_image_member_for_constant_map(self, rng):
        p = qnormalize(rng.normal(size=4))
        q, xi = fl.push_forward(HOPF, p, geo.perp_frame(p, F.vector_field(HOPF, p).vec).u1)
        jxi = fl.apply_acs(q, xi, "J")
        assert fl.E_membership_defect(HOPF, p, jxi) <= 1e-6

    def test_jj_image_member_for_conformal_map(self, scans):
        scan = scans("CONF05")
        for i in (2, 17, 31):
            p = scan.array("p")[i]
            seed = scan.array("a")[i]
            q, xi = fl.push_forward(CONF05, p, scan.array("u1")[i], seed=seed)
            jjxi = fl.apply_acs(q, xi, "JJ")
            assert fl.E_membership_defect(CONF05, p, jjxi, seed=seed) <= 1e-4

    def test_flow_invariance_of_membership(self, scans):
        scan = scans("CONF05")
        rng = np.random.default_rng(2)
        for i in (4, 9):
            p = scan.array("p")[i]
            seed = scan.array("a")[i]
            q, xi = fl.push_forward(CONF05, p, scan.array("u2")[i], seed=seed)
            t = rng.uniform(0, 2 * np.pi)
            moved = fl.geodesic_flow(q, t)
            flowed = fl.dflow_ker_alpha(q, xi, t)
            assert fl.E_membership_defect(CONF05, moved.p, flowed, seed=seed) <= 1e-6


class TestCommutation:
    def test_symplectic_rotation_commutes_exactly(self, rng):
        q = random_sm_point(rng)
        xi = random_ker(rng, q)
        assert fl.commutation_defect(q, xi, 1.234, "J") <= 1e-10

    def test_componentwise_structure_commutes(self, rng):
        worst = 0.0
        for _ in range(100):
            q = random_sm_point(rng)
            xi = random_ker(rng, q)
            t = rng.uniform(0, 2 * np.pi)
            worst = max(worst, fl.commutation_defect(q, xi, t, "JJ"))
        assert worst <= 1e-8

    def test_zero_time(self, rng):
        q = random_sm_point(rng)
        xi = random_ker(rng, q)
        assert fl.commutation_defect(q, xi, 0.0, "JJ") == 0.0


class TestChirality:
    def test_table_at_standard_point(self):
        w = fl.chirality_witness(fl.SMPoint(E0, E1))
        assert w.i_action == (1, -1)
        assert w.jj_action == (-1, -1)

    def test_spiral_classes_move_single_factors(self):
        """(w, +jw) moves only one factor, (w, -jw) only the other, and a
        mixed vector moves both."""
        q = fl.SMPoint(E0, E1)
        w, jw = fl._spiral_base(q)
        (m0, dm), (n0, dn) = fl._factor_velocities(q, fl.KerAlphaVector(w, jw))
        assert np.linalg.norm(dm) <= 1e-6 and np.linalg.norm(dn) > 1.0
        (m0, dm), (n0, dn) = fl._factor_velocities(q, fl.KerAlphaVector(w, -jw))
        assert np.linalg.norm(dn) <= 1e-6 and np.linalg.norm(dm) > 1.0
        (m0, dm), (n0, dn) = fl._factor_velocities(q, fl.KerAlphaVector(w, np.zeros(4)))
        assert np.linalg.norm(dm) > 0.5 and np.linalg.norm(dn) > 0.5

    def test_table_is_point_independent(self, rng):
        for _ in range(50):
            w = fl.chirality_witness(random_sm_point(rng))
            assert w.i_action == (1, -1)
            assert w.jj_action == (-1, -1)
