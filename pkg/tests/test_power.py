import json
from importlib import resources

import pytest

from fluxon.core import PHI0
from fluxon.power import (
    PowerInputs,
    Technology,
    dynamic_power,
    energy_per_pulse,
    scale_projection,
    total_power,
)


def bundled(name):
    return resources.files("fluxon.data").joinpath(f"power/{name}.json").read_text()


class TestEnergy:
    def test_reference_junction(self):
        assert energy_per_pulse(109e-6) == pytest.approx(2.254e-19, rel=0.005)

    def test_zero(self):
        assert energy_per_pulse(0.0) == 0.0

    def test_larger_junction(self):
        # 243e-6 * 2.068e-15
        assert energy_per_pulse(243e-6) == pytest.approx(5.025e-19, rel=1e-3)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            energy_per_pulse(-1e-6)


class TestDynamicPower:
    def test_reference_network(self):
        assert dynamic_power(88, 109e-6, 1e9) == pytest.approx(1.98e-8, rel=0.01)

    def test_large_network_cell_count(self):
        cfg = PowerInputs.from_json(bundled("nw_b"))
        dyn = dynamic_power(cfg.n_switching_cells, cfg.ic, cfg.clock)
        assert dyn == pytest.approx(0.57e-3, rel=0.01)

    def test_zero_cells(self):
        assert dynamic_power(0, 109e-6, 1e9) == 0.0

    def test_linearity(self):
        base = dynamic_power(10, 100e-6, 1e9)
        assert dynamic_power(20, 100e-6, 1e9) == pytest.approx(2 * base)
        assert dynamic_power(10, 200e-6, 1e9) == pytest.approx(2 * base)
        assert dynamic_power(10, 100e-6, 2e9) == pytest.approx(2 * base)


class TestTotalPower:
    @pytest.mark.parametrize(
        "name,total,sops,spw",
        [
            ("iris", 0.014, 1.2e10, 8.57e11),
            ("nw_a", 0.158, 4e12, 2.53e13),
            ("nw_b", 2.0, 1.6e16, 8e15),
        ],
    )
    def test_reference_chain(self, name, total, sops, spw):
        rep = total_power(PowerInputs.from_json(bundled(name)))
        assert rep.total_w == pytest.approx(total, rel=0.01)
        assert rep.sops == pytest.approx(sops, rel=0.01)
        assert rep.sops_per_watt == pytest.approx(spw, rel=0.01)

    def test_report_invariants(self):
        rep = total_power(PowerInputs.from_json(bundled("iris")))
        assert rep.total_w == (rep.dynamic_w + rep.static_on_chip_w) * 400.0
        assert rep.sops_per_watt * rep.total_w == pytest.approx(rep.sops, rel=1e-12)

    def test_no_cooling_no_static(self):
        inp = PowerInputs("x", 10, 100e-6, 1e9, 0.0, cooling_overhead=1.0, sops_rated=1.0)
        rep = total_power(inp)
        assert rep.total_w == rep.dynamic_w

    def test_validation(self):
        with pytest.raises(ValueError):
            PowerInputs("x", 1, 1e-6, 1e9, 0.0, cooling_overhead=0.5)
        with pytest.raises(ValueError):
            PowerInputs("x", -1, 1e-6, 1e9, 0.0)


class TestScaleProjection:
    def proj(self, tech):
        cfg = json.loads(resources.files("fluxon.data").joinpath("power/nw_d.json").read_text())
        return scale_projection(
            cfg["cores"],
            cfg["neurons_per_core"],
            cfg["per_core_power_w"],
            cfg["per_core_sops"],
            tech,
            per_core_static_w=cfg["per_core_static_w"],
        )

    def test_multicore_order_of_magnitude(self):
        rep = self.proj(Technology.RSFQ)
        assert 1e17 <= rep.sops <= 1e19
        assert 0.1 <= rep.sops_per_watt / 1e15 <= 10.0

    def test_efficient_bias_variant(self):
        rep = self.proj("eRSFQ")
        assert 0.1 <= rep.sops_per_watt / 1e16 <= 10.0
        assert rep.static_on_chip_w == 0.0

    def test_adiabatic_variant(self):
        rep = self.proj("AQFP")
        assert 0.1 <= rep.sops_per_watt / 1e17 <= 10.0

    def test_single_core_identity(self):
        rep = scale_projection(1, 256, 5e-3, 1.6e16, "RSFQ", per_core_static_w=4.43e-3)
        assert rep.sops == 1.6e16
        assert rep.on_chip_w == pytest.approx(5e-3)
        assert rep.total_w == pytest.approx(2.0)

    def test_counts_validated(self):
        with pytest.raises(ValueError):
            scale_projection(0, 256, 1e-3, 1e12)


def test_energy_is_flux_quantum_times_current():
    for ic in (1e-6, 109e-6, 243e-6):
        assert energy_per_pulse(ic) == ic * PHI0
