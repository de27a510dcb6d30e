import json
import math

import numpy as np
import pytest

import lora_indoor as li


def test_airtime_worked_example():
    cfg = li.RadioConfig(sf=7, payload_bytes=18, crc_on=True, implicit_header=True, cr_index=1)
    assert li.payload_symbols(cfg) == 33
    assert li.symbol_duration(cfg) == pytest.approx(1.024e-3, abs=1e-12)
    assert li.time_on_air(cfg) == pytest.approx(46.336e-3, abs=1e-12)
    assert li.duty_cycle([(cfg, 5)])["total_airtime_ms_per_hour"] == pytest.approx(231.68)


def test_link_budget():
    assert li.esp(-73, 0) == pytest.approx(-76.01029995663981, rel=1e-13)
    assert li.esp(-90, 3) - li.noise_power(-90, 3) == pytest.approx(3.0, abs=1e-9)
    assert li.experimental_path_loss(-128) == pytest.approx(145.26, abs=1e-12)
    assert li.receivable(-120, -5, 7)
    with pytest.raises(li.LoraIndoorError):
        li.receivable(-120, -5, 13)


def test_adr():
    s = li.AdrState()
    s.current_sf = 8
    s = s.record_snr(9.5)
    state, decision, margin, unspecified = s.step()
    assert decision == "LOWER_SF"
    assert state.current_sf == 7
    assert not unspecified


def test_models():
    mw = li.reference_model("mw")
    assert li.predict(mw, 10) == pytest.approx(67.5)
    ep = li.reference_model("mw-ep")
    env = {"temperature": 21.207, "humidity": 37.544, "pressure": 323.321, "pm25": 1.982, "co2": 553.934}
    assert li.predict(ep, 10, freq_mhz=868.1, env=env, snr_db=7.419) == pytest.approx(73.18676139542121)
    with pytest.raises(ValueError):
        li.predict(mw, 0.5)


def test_shadowing_and_scene():
    draws = li.sample_shadowing(9.0, 7, 200_000)
    assert isinstance(draws, np.ndarray)
    assert np.std(draws) == pytest.approx(9.0, abs=0.1)
    scene = li.simulate_scene(seed=1, sigma_db=0.0)
    assert scene.shape == (500, 4)
    assert np.array_equal(scene[:, 1], scene[:, 2])


def test_isolation_forest():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(300, 3))
    x[17] = [12, 12, 12]
    scores, flags = li.isolation_forest(x, contamination=1 / 300)
    assert flags[17] and sum(flags) == 1
    assert len(scores) == 300


def test_pipeline_fit_and_evaluate(tmp_path):
    header = ("time,device_id,co2,humidity,pm25,pressure,temperature,rssi,snr,SF,frequency,f_count,p_count,"
              "toa,distance,c_walls,w_walls,exp_pl,n_power,esp")
    rng = np.random.default_rng(4)
    lines = [header]
    devices = [("ED0", 10, 0, 0), ("ED1", 8, 1, 0), ("ED2", 25, 0, 2), ("ED3", 18, 1, 2)]
    for d, (dev, dist, brick, wood) in enumerate(devices):
        for f in range(150):
            minute = d * 150 + f
            pl = 40 + 35 * math.log10(dist) + 9 * brick + 3 * wood + rng.normal(0, 4)
            rssi = round(17.26 - pl, 1)
            snr = 5.0
            n = rssi - 10 * math.log10(1 + 10 ** (snr / 10))
            lines.append(f"2024-03-01 {minute // 60:02d}:{minute % 60:02d}:00,{dev},550,37,2,323,21,{rssi},{snr},7,"
                         f"868.1,{f},{f},0.046,{dist},{brick},{wood},{17.26 - rssi},{n},{n + snr}")
    src = tmp_path / "data.csv"
    src.write_text("\n".join(lines) + "\n")
    counts = li.run_pipeline(src, tmp_path / "out", seed=3)
    assert counts["rows_read"] == 600
    assert counts["anomalies"] == 4 * round(0.01 * 150)
    report = li.fit_csv(tmp_path / "out" / "train.csv", "mw")
    assert report["converged"]
    assert report["model"]["variant"] == "mw"
    ev = li.evaluate_csv(report["model"], tmp_path / "out" / "test.csv")
    assert 2 < ev["rmse_db"] < 7
    json.dumps(li.cross_validate_csv(tmp_path / "out" / "cleaned.csv", "mw", 5, 1))
