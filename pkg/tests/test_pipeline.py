import numpy as np
import pytest

import radarvitals as rv
from radarvitals.cli import main
from radarvitals.kvfile import format_kv, parse_kv, read_kv, write_kv
from radarvitals.pipeline import (
    breathing_csv,
    detections_csv,
    order_diagnostics_csv,
    pipeline_config_from_entries,
    pipeline_config_to_entries,
    run_pipeline,
    vitals_csv,
)
from helpers import breather, m16_scene, scene_of


def test_kv_parse_and_format():
    text = "a 1\n# comment\nb  two words \n\nc 3 # trailing\n"
    entries = parse_kv(text)
    assert entries == {"a": "1", "b": "two words", "c": "3"}
    assert parse_kv(format_kv(entries)) == entries
    with pytest.raises(ValueError, match="duplicate"):
        parse_kv("a 1\na 2\n")
    with pytest.raises(ValueError, match="key value"):
        parse_kv("loner\n")


def test_kv_file_roundtrip(tmp_path):
    path = tmp_path / "c.kv"
    write_kv(path, {"x": "1.5"})
    assert read_kv(path) == {"x": "1.5"}


def test_pipeline_config_roundtrip():
    config = rv.PipelineConfig(w_st=32, l_st=100, alpha=2.5, accumulate=False,
                               grid=rv.GridSpec(3.0, 0.05, 0.3 * np.pi, np.pi / 90))
    entries = pipeline_config_to_entries(config)
    assert pipeline_config_from_entries(entries) == config


def test_pipeline_config_unknown_key():
    with pytest.raises(rv.ConfigError, match="unknown"):
        pipeline_config_from_entries({"bogus": "1"})
    with pytest.raises(rv.ConfigError, match="grid"):
        pipeline_config_from_entries({"grid.bogus": "1"})


def test_pipeline_config_validation(walabot, derived):
    with pytest.raises(rv.ConfigError):
        rv.PipelineConfig(l_st=1).validate(walabot, derived)
    with pytest.raises(rv.ConfigError):
        rv.PipelineConfig(n_cov=500).validate(walabot, derived)
    with pytest.raises(rv.ConfigError):
        rv.PipelineConfig(p_sub=76).validate(walabot, derived)
    with pytest.raises(rv.ConfigError):
        rv.PipelineConfig(w_k_music=200).validate(walabot, derived)


def test_empty_room_yields_no_tracks(walabot):
    scene = scene_of([], l=464, noise_std=0.1, seed=4)
    result = run_pipeline(rv.simulate(scene, walabot))
    assert len(result.segments) == 2
    assert all(s.p_hat == 0 for s in result.segments)
    assert result.tracks == []
    assert result.final_detections.detections == []


def test_pipeline_deterministic(walabot):
    scene = scene_of([breather(2.0, 10.0, amp=0.0015)], l=464, noise_std=0.1, seed=6)
    a = run_pipeline(rv.simulate(scene, walabot))
    b = run_pipeline(rv.simulate(scene, walabot))
    assert detections_csv(a) == detections_csv(b)
    assert vitals_csv(a) == vitals_csv(b)
    assert breathing_csv(a) == breathing_csv(b)


def test_pipeline_single_person_tracked(walabot):
    scene = scene_of([breather(2.0, 10.0, f_b=0.3, amp=0.0015)], l=664,
                     noise_std=0.1, seed=6)
    result = run_pipeline(rv.simulate(scene, walabot))
    assert [s.p_hat for s in result.segments] == [1, 1, 1]
    main_tracks = [t for t in result.tracks if len(t.records) == 3]
    assert len(main_tracks) == 1
    track = main_tracks[0]
    assert track.breathing_estimate == pytest.approx(0.3, abs=0.01)
    loc = track.last_location
    assert loc.d == pytest.approx(2.0, abs=0.05)
    assert loc.theta == pytest.approx(np.deg2rad(10.0), abs=np.deg2rad(1.5))


def test_no_accumulate_first_segment_identical(walabot):
    scene = scene_of([breather(2.0, 10.0, amp=0.0015)], l=664, noise_std=0.1, seed=6)
    cube = rv.simulate(scene, walabot)
    acc = run_pipeline(cube, rv.PipelineConfig())
    iso = run_pipeline(cube, rv.PipelineConfig(accumulate=False))
    assert detections_csv(acc).splitlines()[1] == detections_csv(iso).splitlines()[1]


def test_csv_shapes(walabot):
    scene = scene_of([breather(2.0, 10.0, amp=0.0015)], l=464, noise_std=0.1, seed=6)
    result = run_pipeline(rv.simulate(scene, walabot))
    det_lines = detections_csv(result).splitlines()
    assert det_lines[0] == "segment,p_hat,track,d_m,theta_rad,x_m,y_m,value"
    assert len(det_lines) >= 2
    vit_lines = vitals_csv(result).splitlines()
    assert vit_lines[0] == "track,segment,t_s,eta_m"
    assert len(vit_lines) == 1 + sum(len(t.series) for t in result.tracks) * 200
    diag_lines = order_diagnostics_csv(result).splitlines()
    assert diag_lines[0] == "segment,index,eigenvalue,rd,is_candidate,beta,p_hat"


def test_evaluate_result_scores_truth(walabot):
    scene = scene_of([breather(2.0, 0.0, f_b=0.3, amp=0.0015)], l=464,
                     noise_std=0.1, seed=6)
    result = run_pipeline(rv.simulate(scene, walabot))
    report = rv.evaluate_result(result, scene)
    assert report.tpp == 1.0
    assert report.fdp == 0.0
    assert report.breathing_errors is not None
    assert abs(report.breathing_errors[0]) < 0.05


def _write_scene(path, extra=""):
    path.write_text(
        "l 464\nf_st 10.0\nnoise_std 0.1\nseed 6\n"
        "person.0.d 2.0\nperson.0.theta 0.174532925199433\n"
        "person.0.breath_freq 0.3\nperson.0.breath_amp 0.0015\n" + extra,
        encoding="utf-8",
    )


def test_cli_end_to_end(tmp_path, capsys):
    scene_path = tmp_path / "scene.kv"
    _write_scene(scene_path, "id T7\nobstacle free\n")
    container = tmp_path / "rec.rvc"
    assert main(["simulate", "--scenario", str(scene_path), "--out", str(container)]) == 0
    det_csv = tmp_path / "det.csv"
    assert main(["detect", "--in", str(container), "--out", str(det_csv),
                 "--order-diagnostics", str(tmp_path / "moe.csv")]) == 0
    assert det_csv.exists() and (tmp_path / "moe.csv").exists()
    vit_csv = tmp_path / "vitals.csv"
    breath_csv = tmp_path / "breath.csv"
    assert main(["vitals", "--in", str(container), "--out", str(vit_csv),
                 "--breathing-out", str(breath_csv),
                 "--periodogram-out", str(tmp_path / "pgram.csv")]) == 0
    report_csv = tmp_path / "report.csv"
    assert main(["evaluate", "--in", str(det_csv), "--truth", str(container),
                 "--breathing", str(breath_csv), "--out", str(report_csv)]) == 0
    out = capsys.readouterr().out
    assert "TPP=1.000" in out
    report = report_csv.read_text(encoding="utf-8").splitlines()
    assert report[0].startswith("id,obstacle,")
    assert report[1].startswith("T7,free,1,1,0,0,")
    assert main(["dump-spectrum", "--in", str(container),
                 "--out", str(tmp_path / "spec.csv")]) == 0
    spec_lines = (tmp_path / "spec.csv").read_text(encoding="utf-8").splitlines()
    assert spec_lines[0] == "d_m,theta_rad,value"
    assert len(spec_lines) == 1 + 181 * 145


def test_cli_rerun_byte_identical(tmp_path):
    scene_path = tmp_path / "scene.kv"
    _write_scene(scene_path)
    main(["simulate", "--scenario", str(scene_path), "--out", str(tmp_path / "a.rvc")])
    main(["simulate", "--scenario", str(scene_path), "--out", str(tmp_path / "b.rvc")])
    assert (tmp_path / "a.rvc").read_bytes() == (tmp_path / "b.rvc").read_bytes()
    main(["detect", "--in", str(tmp_path / "a.rvc"), "--out", str(tmp_path / "a.csv")])
    main(["detect", "--in", str(tmp_path / "b.rvc"), "--out", str(tmp_path / "b.csv")])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_cli_convert_roundtrip(tmp_path):
    from helpers import raw_recording_of

    cfg = rv.walabot_config(10.0)
    cube = rv.simulate(scene_of([breather(1.8, 0.0)], l=2), cfg)
    rv.write_raw_dir(tmp_path / "raw", raw_recording_of(cube), cfg)
    out = tmp_path / "conv.rvc"
    assert main(["convert", "--raw", str(tmp_path / "raw"), "--out", str(out)]) == 0
    back = rv.read_container(out)
    np.testing.assert_allclose(back.samples, cube.samples, atol=1e-8)


def test_cli_usage_error_exit_code():
    with pytest.raises(SystemExit) as err:
        main(["detect"])  # missing required arguments
    assert err.value.code == 2


def test_cli_missing_file_is_data_error(tmp_path):
    assert main(["detect", "--in", str(tmp_path / "nope.rvc"),
                 "--out", str(tmp_path / "out.csv")]) == 3


def test_cli_bad_container_is_data_error(tmp_path):
    bad = tmp_path / "bad.rvc"
    bad.write_bytes(b"not a container")
    assert main(["detect", "--in", str(bad), "--out", str(tmp_path / "o.csv")]) == 3


def test_cli_evaluate_without_truth_is_data_error(tmp_path):
    cfg = rv.walabot_config(10.0)
    cube = rv.simulate(scene_of([], l=4), cfg)
    cube.ground_truth = None
    container = tmp_path / "plain.rvc"
    rv.write_container(cube, container)
    det = tmp_path / "det.csv"
    det.write_text("segment,p_hat,track,d_m,theta_rad,x_m,y_m,value\n", encoding="utf-8")
    assert main(["evaluate", "--in", str(det), "--truth", str(container)]) == 3


def test_cli_bad_scene_key_is_usage_error(tmp_path):
    scene_path = tmp_path / "scene.kv"
    scene_path.write_text("l 10\nwhoops 3\n", encoding="utf-8")
    assert main(["simulate", "--scenario", str(scene_path),
                 "--out", str(tmp_path / "x.rvc")]) == 2
