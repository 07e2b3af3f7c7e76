import numpy as np
import pytest

from elastwave.service.client import ServiceClient

from conftest import random_cubic_constants

CUBIC = {"c11": 2.1, "c12": 0.8, "c44": 1.4, "c111": -3.2, "c112": 1.1,
         "c144": -0.7, "c123": 2.3, "c166": -1.9, "c456": 0.6}
ISO = {"lam": 1.7, "mu": 0.9, "l": -2.0, "m": 1.4, "n": 0.8}


@pytest.fixture(scope="module")
def client():
    return ServiceClient()


def cubic_material(constants=None):
    return {"builtin": {"kind": "cubic_m3m", "constants": constants or CUBIC}}


def iso_material():
    return {"builtin": {"kind": "isotropic", "constants": ISO}}


class TestHealthAndValidation:
    def test_health(self, client):
        status, body = ServiceClient().post("/analyze", {})
        assert status == 422  # malformed request rejected by the schema

    def test_unknown_builtin_constant(self, client):
        status, body = client.post("/analyze", {
            "material": {"builtin": {"kind": "isotropic",
                                     "constants": {"bogus": 1.0}}},
            "direction": [1, 0, 0]})
        assert status == 400
        assert body["detail"]["kind"] == "validation"

    def test_zero_direction(self, client):
        status, body = client.post("/analyze", {
            "material": iso_material(), "direction": [0, 0, 0]})
        assert status == 400
        assert "nonzero" in body["detail"]["message"]

    def test_both_material_fields_rejected(self, client):
        status, _ = client.post("/analyze", {
            "material": {"builtin": {"kind": "isotropic", "constants": ISO},
                         "document": {"symmetry": "isotropic", "c2": {}}},
            "direction": [1, 0, 0]})
        assert status == 422

    def test_document_material(self, client):
        doc = {"symmetry": "isotropic", "c2": {"12": 1.7, "44": 0.9}}
        status, body = client.post("/analyze", {
            "material": {"document": doc}, "direction": [0, 0, 1]})
        assert status == 200
        assert body["modes"][0]["alpha"] == pytest.approx(1.7 + 2 * 0.9)

    def test_bad_document_reports_entry(self, client):
        doc = {"symmetry": "triclinic",
               "c2": {"11": 3.0, "22": 3.0, "33": 3.0, "44": 1.0,
                       "55": 1.0, "66": 1.0, "12": 1.2, "21": 1.3}}
        status, body = client.post("/analyze", {
            "material": {"document": doc}, "direction": [0, 0, 1]})
        assert status == 400
        assert "12" in body["detail"]["message"]


class TestAnalyze:
    def test_cubic_diagonal_r1(self, client):
        status, body = client.post("/analyze", {
            "material": cubic_material(), "direction": [1, 1, 1]})
        assert status == 200
        pair = body["shear"][0]
        assert pair["coupling_class"] == "r1"
        assert pair["canonical_form"] == "coupled_threefold"
        bracket = (CUBIC["c111"] + 2 * CUBIC["c123"] - 2 * CUBIC["c456"]
                   - 3 * (CUBIC["c112"] - CUBIC["c144"] + CUBIC["c166"]))
        lam1 = -np.sqrt((CUBIC["c11"] - CUBIC["c12"] + CUBIC["c44"]) / 3)
        assert pair["gammas"]["gamma_s2"] == pytest.approx(
            bracket / (18 * np.sqrt(2) * lam1), rel=1e-9)
        assert not pair["decoupled"]

    def test_isotropic_classification(self, client):
        status, body = client.post("/analyze", {
            "material": iso_material(), "direction": [0.3, -0.2, 0.93]})
        assert status == 200
        assert body["longitudinal"]["canonical_form"] == "burgers"
        pair = body["shear"][0]
        assert pair["coupling_class"] == "r0"
        assert pair["decoupled"]
        assert pair["cubic_pair"] is not None


class TestScan:
    def test_cubic_families(self, client):
        status, body = client.post("/scan", {
            "material": cubic_material(), "resolution": 40})
        assert status == 200
        assert not body["globally_degenerate"]
        found = np.array([row["n"] for row in body["axes"]])
        for target in ([1, 0, 0], [0, 1, 0], [0, 0, 1]):
            assert np.max(np.abs(found @ np.array(target, float))) >= 1 - 1e-6
        diag = np.ones(3) / np.sqrt(3)
        assert np.max(np.abs(found @ diag)) >= 1 - 1e-6

    def test_isotropic_globally_degenerate(self, client):
        status, body = client.post("/scan", {
            "material": iso_material(), "resolution": 24})
        assert status == 200
        assert body["globally_degenerate"]
        assert body["representative_alphas"][0] == pytest.approx(
            ISO["lam"] + 2 * ISO["mu"])

    def test_resolution_floor_schema(self, client):
        status, _ = client.post("/scan", {
            "material": iso_material(), "resolution": 8})
        assert status == 422


class TestDecoupling:
    def test_cubic_100(self, client):
        status, body = client.post("/check-decoupling", {
            "material": cubic_material(), "direction": [1, 0, 0]})
        assert status == 200
        assert body["decoupled"]
        assert body["coupling_class"] == "r0"

    def test_cubic_111(self, client):
        status, body = client.post("/check-decoupling", {
            "material": cubic_material(), "direction": [1, 1, 1]})
        assert status == 200
        assert not body["decoupled"]
        assert body["mu"] != 0

    def test_off_axis_rejected(self, client):
        status, body = client.post("/check-decoupling", {
            "material": cubic_material(), "direction": [1, 1, 0]})
        assert status == 400
        assert "acoustic axis" in body["detail"]["message"]


class TestEvolve:
    def _request(self, **overrides):
        payload = {
            "material": cubic_material(),
            "direction": [1, 1, 1],
            "initial": {"kind": "gaussian", "center": 0.5, "width": 0.06,
                        "amplitude": 0.1},
            "solver": {"cells": 128, "tau_end": 0.5, "snapshots": 3},
        }
        payload.update(overrides)
        return payload

    def test_pair_coupling_generates_companion(self, client):
        status, body = client.post("/evolve", self._request())
        assert status == 200
        assert body["system"]["form"] == "coupled_threefold"
        last = np.array(body["snapshots"][-1]["sigma"])
        assert last.shape == (128, 2)
        assert np.max(np.abs(last[:, 1])) > 0

    def test_transport_direction_is_exact(self, client):
        payload = self._request(direction=[1, 0, 0])
        status, body = client.post("/evolve", payload)
        assert status == 200
        assert body["system"]["form"] == "transport_pair"
        first = np.array(body["snapshots"][0]["sigma"])
        last = np.array(body["snapshots"][-1]["sigma"])
        assert np.array_equal(first, last)

    def test_longitudinal_burgers_mass_conserved(self, client):
        payload = self._request(direction=[0.2, -0.4, 0.89],
                                material=iso_material(), wave="longitudinal",
                                initial={"kind": "sine", "amplitude": 0.05})
        status, body = client.post("/evolve", payload)
        assert status == 200
        assert body["system"]["form"] == "burgers"
        d = body["diagnostics"]
        assert d["mass_final"][0] == pytest.approx(d["mass_initial"][0], abs=1e-12)

    def test_manifest_reproduces_run(self, client):
        status, body = client.post("/evolve", self._request())
        assert status == 200
        man = body["manifest"]
        for key in ("material", "direction", "wave", "system", "solver",
                    "initial", "tolerances", "version"):
            assert key in man

    def test_initial2_rejected_for_scalar(self, client):
        payload = self._request(material=iso_material(),
                                direction=[0.3, 0.1, 0.95],
                                wave="longitudinal",
                                initial2={"kind": "zero"})
        status, body = client.post("/evolve", payload)
        assert status == 400

    def test_sample_initial_data(self, client):
        xs = list(np.linspace(0, 1, 33))
        ys = list(np.sin(2 * np.pi * np.asarray(xs)))
        payload = self._request(
            material=iso_material(), direction=[0.3, 0.1, 0.95],
            wave="longitudinal",
            initial={"kind": "samples", "sample_eta": xs, "sample_values": ys},
            solver={"cells": 64, "tau_end": 0.01, "snapshots": 1})
        status, body = client.post("/evolve", payload)
        assert status == 200


class TestDeterminism:
    def test_identical_requests_identical_responses(self, client, rng):
        payload = {
            "material": cubic_material(random_cubic_constants(rng)),
            "direction": [1, 1, 1],
            "initial": {"kind": "gaussian", "amplitude": 0.2, "width": 0.08},
            "solver": {"cells": 96, "tau_end": 0.3, "snapshots": 2},
        }
        _, a = client.post("/evolve", payload)
        _, b = client.post("/evolve", payload)
        assert a == b
