import io

import numpy as np
import pytest

from motrack import io as mio
from motrack.geometry import Box
from motrack.tracker import FrameOutput


class TestParseDetections:
    def test_single_row(self):
        dets = mio.parse_detections(io.StringIO("1,-1,10,20,30,40,0.9,-1,-1,-1\n"))
        assert list(dets) == [1]
        d = dets[1][0]
        assert d.box == Box(10, 20, 30, 40)
        assert d.score == 0.9

    def test_empty_file(self):
        assert mio.parse_detections(io.StringIO("")) == {}

    def test_interleaved_frames_group_correctly(self):
        # sort-then-compare oracle: grouping must match a stable sort by frame
        rows = [
            (2, 10.0), (1, 20.0), (2, 30.0), (3, 40.0), (1, 50.0), (2, 60.0),
        ]
        text = "".join(f"{f},-1,{x},0,5,5,0.5,-1,-1,-1\n" for f, x in rows)
        dets = mio.parse_detections(io.StringIO(text))
        want = {}
        for f, x in sorted(rows, key=lambda r: r[0]):
            want.setdefault(f, []).append(x)
        got = {f: [d.box.left for d in ds] for f, ds in dets.items()}
        assert got == want

    def test_malformed_row_names_line(self):
        text = "1,-1,10,20,30,40,0.9,-1,-1,-1\n1,-1,oops,20,30,40,0.9,-1,-1,-1\n"
        with pytest.raises(mio.ParseError, match=":2:"):
            mio.parse_detections(io.StringIO(text))

    def test_negative_extent_rejected(self):
        with pytest.raises(mio.ParseError, match=":1:"):
            mio.parse_detections(io.StringIO("1,-1,10,20,-5,40,0.9,-1,-1,-1\n"))

    def test_short_row_rejected(self):
        with pytest.raises(mio.ParseError):
            mio.parse_detections(io.StringIO("1,-1,10\n"))

    def test_crlf_accepted(self):
        dets = mio.parse_detections(io.StringIO("1,-1,1,2,3,4,0.5,-1,-1,-1\r\n"))
        assert dets[1][0].box == Box(1, 2, 3, 4)


class TestEmbeddings:
    def test_normalization_at_ingestion(self):
        # norm arithmetic: (3, 4) -> (0.6, 0.8)
        text = "2,1\n1,0,3,4\n"
        embs = mio.parse_embeddings(io.BytesIO(text.encode()))
        assert np.allclose(embs[1][0], [0.6, 0.8], atol=1e-12)

    def test_zero_vector_rejected(self):
        with pytest.raises(mio.ParseError, match="zero embedding"):
            mio.parse_embeddings(io.BytesIO(b"2,1\n1,0,0,0\n"))

    def test_nan_rejected(self):
        with pytest.raises(mio.ParseError, match="non-finite"):
            mio.parse_embeddings(io.BytesIO(b"2,1\n1,0,nan,1\n"))

    def test_sparse_ordinals_rejected(self):
        with pytest.raises(mio.ParseError, match="ordinal"):
            mio.parse_embeddings(io.BytesIO(b"2,1\n1,1,3,4\n"))

    def test_count_mismatch_names_frame(self):
        with pytest.raises(mio.ParseError, match="frame 1"):
            mio.parse_embeddings(
                io.BytesIO(b"2,1\n1,0,3,4\n"), expected_count_per_frame={1: 2}
            )

    def test_text_and_binary_parse_identically(self):
        rng = np.random.default_rng(3)
        embs = {
            f: [rng.standard_normal(16) for _ in range(int(rng.integers(1, 4)))]
            for f in range(1, 6)
        }
        text_buf, bin_buf = io.StringIO(), io.BytesIO()
        mio.write_embeddings(text_buf, embs, fmt="text")
        mio.write_embeddings(bin_buf, embs, fmt="binary")
        from_text = mio.parse_embeddings(io.BytesIO(text_buf.getvalue().encode()))
        from_bin = mio.parse_embeddings(io.BytesIO(bin_buf.getvalue()))
        assert list(from_text) == list(from_bin)
        for f in from_text:
            for a, b in zip(from_text[f], from_bin[f]):
                assert np.array_equal(a, b)

    def test_binary_round_trip_via_file(self, tmp_path):
        rng = np.random.default_rng(5)
        embs = {7: [rng.standard_normal(8), rng.standard_normal(8)]}
        path = tmp_path / "emb.bin"
        mio.write_embeddings(path, embs, fmt="binary")
        out = mio.parse_embeddings(path)
        assert len(out[7]) == 2

    def test_header_count_mismatch_rejected(self):
        with pytest.raises(mio.ParseError, match="announces"):
            mio.parse_embeddings(io.BytesIO(b"2,5\n1,0,3,4\n"))


class TestCmc:
    def test_identity_row(self):
        cmc = mio.parse_cmc(io.StringIO("5,1,0,0,0,1,0\n"))
        t = cmc[5]
        assert np.array_equal(t.matrix, np.eye(2))
        assert np.array_equal(t.translation, [0, 0])

    def test_scale_and_translation_row(self):
        cmc = mio.parse_cmc(io.StringIO("5,2,0,1,0,2,3\n"))
        t = cmc[5]
        assert np.array_equal(t.matrix, [[2, 0], [0, 2]])
        assert np.array_equal(t.translation, [1, 3])

    def test_unlisted_frame_defaults_to_identity(self):
        cmc = mio.parse_cmc(io.StringIO("5,1,0,0,0,1,0\n"))
        assert cmc.get(6) is None  # caller substitutes identity

    def test_malformed_row_names_line(self):
        with pytest.raises(mio.ParseError, match=":1:"):
            mio.parse_cmc(io.StringIO("5,1,0\n"))

    def test_flip_rejected(self):
        with pytest.raises(mio.ParseError, match=":1:"):
            mio.parse_cmc(io.StringIO("5,-1,0,0,0,1,0\n"))

    def test_write_round_trip(self, tmp_path):
        from motrack.geometry import CameraTransform

        cmc = {2: CameraTransform([[1.5, 0], [0, 1.5]], [3.25, -2.0])}
        path = tmp_path / "cmc.txt"
        mio.write_cmc(path, cmc)
        back = mio.parse_cmc(path)
        assert np.array_equal(back[2].matrix, cmc[2].matrix)
        assert np.array_equal(back[2].translation, cmc[2].translation)


class TestTracks:
    def test_single_track_row_per_confirmed_frame(self):
        outputs = [
            FrameOutput(1, [(1, Box(0, 0, 10, 10), 0.9)]),
            FrameOutput(2, [(1, Box(1, 0, 10, 10), 0.8)]),
        ]
        buf = io.StringIO()
        mio.write_tracks(outputs, buf)
        lines = buf.getvalue().splitlines()
        assert lines == [
            "1,1,0.00,0.00,10.00,10.00,0.90,-1,-1,-1",
            "2,1,1.00,0.00,10.00,10.00,0.80,-1,-1,-1",
        ]

    def test_rows_sorted_by_frame_then_id(self):
        outputs = [
            FrameOutput(2, [(5, Box(0, 0, 1, 1), 1.0), (1, Box(0, 0, 1, 1), 1.0)]),
            FrameOutput(1, [(9, Box(0, 0, 1, 1), 1.0)]),
        ]
        buf = io.StringIO()
        mio.write_tracks(outputs, buf)
        keys = [tuple(map(float, l.split(",")[:2])) for l in buf.getvalue().splitlines()]
        assert keys == sorted(keys)

    def test_empty_outputs_empty_file(self):
        buf = io.StringIO()
        mio.write_tracks([], buf)
        assert buf.getvalue() == ""

    def test_write_parse_round_trip_within_quantization(self):
        rng = np.random.default_rng(9)
        outputs = []
        for frame in range(1, 40):
            entries = []
            for tid in range(1, int(rng.integers(1, 5)) + 1):
                box = Box(*rng.uniform(0, 500, 2), *rng.uniform(1, 80, 2))
                entries.append((tid, box, float(rng.uniform(0, 1))))
            outputs.append(FrameOutput(frame, entries))
        buf = io.StringIO()
        mio.write_tracks(outputs, buf)
        back = mio.parse_tracks(io.StringIO(buf.getvalue()))
        for fo in outputs:
            parsed = {tid: (b, s) for tid, b, s in back[fo.frame]}
            for tid, box, score in fo.entries:
                got_box, got_score = parsed[tid]
                for g, w in zip(got_box.as_ltwh(), box.as_ltwh()):
                    assert abs(g - w) <= 0.01 + 1e-9
                assert abs(got_score - score) <= 0.01 + 1e-9

    def test_duplicate_frame_id_rejected(self):
        text = "1,1,0,0,5,5,1,-1,-1,-1\n1,1,2,2,5,5,1,-1,-1,-1\n"
        with pytest.raises(mio.ParseError, match="duplicate"):
            mio.parse_tracks(io.StringIO(text))
