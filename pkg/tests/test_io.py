import json

import numpy as np
import pytest

from lediflow import io


def test_points_csv_round_trip_exact(tmp_path, rng):
    pts = rng.standard_normal((20, 2))
    io.write_points_csv(tmp_path / "p.csv", pts)
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "x,y"
    assert np.array_equal(io.read_points_csv(tmp_path / "p.csv"), pts)


def test_gray8_mapping():
    assert io.to_gray8(np.array([-1.0, 0.0, 1.0, 5.0, -5.0])).tolist() == [0, 128, 255, 255, 0]


def test_pgm_header_and_round_trip(tmp_path):
    img = np.linspace(-1, 1, 12).reshape(3, 4)
    io.write_pgm(tmp_path / "a.pgm", img)
    raw = (tmp_path / "a.pgm").read_bytes()
    assert raw.startswith(b"P5\n4 3\n255\n")
    assert len(raw) == len(b"P5\n4 3\n255\n") + 12
    back = io.read_pgm(tmp_path / "a.pgm")
    assert back.shape == (3, 4)
    assert np.max(np.abs(back - img)) <= 1.0 / 255 + 1e-12


def test_pgm_flat_input_and_comments(tmp_path):
    io.write_pgm(tmp_path / "a.pgm", np.zeros(16))
    assert io.read_pgm(tmp_path / "a.pgm").shape == (4, 4)
    (tmp_path / "c.pgm").write_bytes(b"P5\n# made by hand\n2 1\n255\n\x00\xff")
    assert io.read_pgm(tmp_path / "c.pgm").tolist() == [[-1.0, 1.0]]
    (tmp_path / "d.pgm").write_bytes(b"P2\n1 1\n255\n0\n")
    with pytest.raises(ValueError):
        io.read_pgm(tmp_path / "d.pgm")


def test_write_images_names(tmp_path):
    names = io.write_images(tmp_path / "imgs", np.zeros((3, 9)), 3, "s")
    assert names == ["s_00000.pgm", "s_00001.pgm", "s_00002.pgm"]
    assert all((tmp_path / "imgs" / n).exists() for n in names)


def test_history_and_manifest(tmp_path):
    io.write_history_csv(tmp_path / "h.csv", [(100, 0.5, 0.1), (200, 0.25, 0.05)], ("step", "loss", "kl"))
    assert (tmp_path / "h.csv").read_text().splitlines() == ["step,loss,kl", "100,0.5,0.1", "200,0.25,0.05"]
    io.write_manifest(tmp_path / "m.json", {"b": 1, "a": [1, 2]})
    text = (tmp_path / "m.json").read_text()
    assert json.loads(text) == {"a": [1, 2], "b": 1}
    assert text.index('"a"') < text.index('"b"')


def test_read_mask_text_and_pgm(tmp_path):
    (tmp_path / "m.txt").write_text("1 0,1\n0\n")
    assert io.read_mask(tmp_path / "m.txt").tolist() == [1, 0, 1, 0]
    io.write_pgm(tmp_path / "m.pgm", np.array([[-1.0, 1.0], [0.0, -1.0]]))
    assert io.read_mask(str(tmp_path / "m.pgm")).tolist() == [0, 1, 1, 0]
