import numpy as np
import pytest

import wfiso


def sphere():
    return wfiso.compress(wfiso.synthesize("sphere", (32, 32, 32)), 16)


def test_volume_round_trip():
    v = wfiso.synthesize("value_noise", (12, 10, 8), seed=3)
    a = v.to_numpy()
    assert a.shape == (8, 10, 12)
    back = wfiso.Volume.from_numpy(a)
    assert back.dims == [12, 10, 8]
    assert np.array_equal(back.to_numpy(), a)


def test_compressed_volume_bytes(tmp_path):
    cv = sphere()
    assert cv.block_dims == [8, 8, 8]
    assert cv.block_stride_bytes == 132
    data = cv.to_bytes()
    assert len(data) == 28 + cv.block_count * (8 + 132)
    path = str(tmp_path / "s.wcz")
    wfiso.save_wcz(path, cv)
    assert open(path, "rb").read() == data
    assert wfiso.load_wcz(path).to_bytes() == data
    assert wfiso.CompressedVolume.from_bytes(data).qbits == 16
    with pytest.raises(wfiso.InputError):
        wfiso.CompressedVolume.from_bytes(data[:-1])


def test_block_error_bound():
    v = wfiso.synthesize("value_noise", (16, 16, 16), seed=1)
    cv = wfiso.compress(v, 8)
    a = v.to_numpy()
    block = cv.decompress_block(0)
    assert block.shape == (4, 4, 4)
    err = np.abs(block - a[:4, :4, :4]).max()
    assert err <= cv.error_bound(0) * (1 + 1e-6)


def test_render_matches_reference():
    cv = sphere()
    cam = wfiso.Camera(eye=(15.5, 15.5, 80.0), look_at=(15.5, 15.5, 15.5))
    out = wfiso.render(cv, cam, 10.0, width=48, height=40, keep_snapshots=True)
    assert out["rgba"].shape == (40, 48, 4)
    assert out["depth"].shape == (40, 48)
    assert out["completeness"] == 1.0
    assert len(out["snapshots"]) == len(out["passes"]) > 0
    assert [p["pass_index"] for p in out["passes"]] == list(range(len(out["passes"])))
    ref = wfiso.reference_render(wfiso.decode_full(cv), cam, 10.0, width=48, height=40)
    diff = wfiso.compare_images(out, ref)
    assert diff["hit_mask_mismatches"] == 0
    assert diff["max_depth_delta"] <= 1e-3
    assert np.isfinite(out["depth"]).sum() > 0


def test_speculation_invariance():
    cv = sphere()
    grids = wfiso.build_grids(cv)
    cam = wfiso.Camera(eye=(60.0, 40.0, 70.0), look_at=(15.5, 15.5, 15.5))
    on = wfiso.render(cv, cam, 9.0, width=32, height=32, grids=grids)
    off = wfiso.render(cv, cam, 9.0, width=32, height=32, speculation=False, grids=grids)
    assert np.array_equal(on["rgba"], off["rgba"])
    assert len(on["passes"]) <= len(off["passes"])


def test_usage_errors():
    with pytest.raises(ValueError):
        wfiso.compress(wfiso.synthesize("sphere", (8, 8, 8)), 27)
    with pytest.raises(ValueError):
        wfiso.synthesize("torus", (8, 8, 8))
