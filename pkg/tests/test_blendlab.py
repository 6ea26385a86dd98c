import json

import numpy as np
import pytest

from histoblend.backend import ToyBackend
from histoblend.blendlab import (
    FIG3_PRESETS,
    blend_sequence,
    fig3_grid,
    layer_blend,
    trace_predictions,
    write_trace,
)
from histoblend.imaging import png_decode
from histoblend.latent import uniform_schedule


class TestBlendSequence:
    def test_minimum_steps_enforced(self, toy, toy_embeddings):
        with pytest.raises(ValueError):
            blend_sequence(toy, 0, 1, toy_embeddings)

    def test_endpoints_match_pure_generations(self, toy, toy_embeddings):
        trace = blend_sequence(toy, 4, 2, toy_embeddings)
        pure_a = toy.generate(4, uniform_schedule(toy_embeddings.classes[0].vector, 12))
        pure_b = toy.generate(4, uniform_schedule(toy_embeddings.classes[1].vector, 12))
        assert np.array_equal(trace.steps[0].image.pixels, pure_a.pixels)
        assert np.array_equal(trace.steps[-1].image.pixels, pure_b.pixels)

    def test_weights_strictly_increase_zero_to_one(self, toy, toy_embeddings):
        trace = blend_sequence(toy, 4, 11, toy_embeddings)
        ws = [s.w for s in trace.steps]
        assert ws[0] == 0.0 and ws[-1] == 1.0
        assert all(b > a for a, b in zip(ws, ws[1:]))

    def test_prediction_monotone_within_quantization(self, toy, toy_embeddings):
        for seed in (0, 5, 17):
            p = trace_predictions(blend_sequence(toy, seed, 11, toy_embeddings))
            assert np.all(np.diff(p) >= -0.01)

    def test_midpoint_even_odds(self, toy, toy_embeddings):
        trace = blend_sequence(toy, 8, 11, toy_embeddings)
        mid = trace.steps[5]
        assert mid.w == pytest.approx(0.5)
        assert mid.prediction.values[1] == pytest.approx(0.5, abs=0.03)


class TestLayerBlend:
    def test_all_first_class_equals_pure_generation(self, toy, toy_embeddings):
        cell = layer_blend(toy, 6, ((1, 12, 0),), toy_embeddings)
        pure = toy.generate(6, uniform_schedule(toy_embeddings.classes[0].vector, 12))
        assert np.array_equal(cell.image.pixels, pure.pixels)

    def test_early_layer_swap_keeps_prediction(self, toy, toy_embeddings):
        pure = layer_blend(toy, 6, ((1, 12, 0),), toy_embeddings)
        swapped = layer_blend(toy, 6, ((1, 8, 1), (9, 12, 0)), toy_embeddings)
        assert swapped.prediction.values[1] == pytest.approx(
            pure.prediction.values[1], abs=0.01
        )
        assert not np.array_equal(pure.image.pixels, swapped.image.pixels)

    def test_fine_layer_swap_moves_prediction(self, toy, toy_embeddings):
        cell = layer_blend(toy, 6, ((1, 8, 0), (9, 12, 1)), toy_embeddings)
        assert cell.prediction.values[1] > 0.5

    def test_bad_ranges_propagate(self, toy, toy_embeddings):
        with pytest.raises(ValueError):
            layer_blend(toy, 6, ((1, 6, 0),), toy_embeddings)


class TestPresetGrid:
    def test_requires_twelve_layers(self, toy_embeddings):
        backend = ToyBackend(layers=10)
        with pytest.raises(ValueError):
            fig3_grid(backend, 0, toy_embeddings)

    def test_labels_and_count(self, toy, toy_embeddings):
        cells = fig3_grid(toy, 2, toy_embeddings)
        assert [c.label for c in cells] == ["B1", "B2", "B3", "B4", "B5", "B6"]

    def test_endpoints_match_blend_trace(self, toy, toy_embeddings):
        cells = fig3_grid(toy, 2, toy_embeddings)
        trace = blend_sequence(toy, 2, 2, toy_embeddings)
        assert np.array_equal(cells[0].image.pixels, trace.steps[0].image.pixels)
        assert np.array_equal(cells[-1].image.pixels, trace.steps[-1].image.pixels)

    def test_early_cells_equal_and_late_cells_shift(self, toy, toy_embeddings):
        cells = fig3_grid(toy, 2, toy_embeddings)
        p = [c.prediction.values[1] for c in cells]
        for i in range(1, 4):
            assert p[i] == pytest.approx(p[0], abs=0.01)
        assert p[4] > 0.5 and p[5] > 0.5

    def test_presets_cover_all_layers(self):
        for label, ranges in FIG3_PRESETS:
            covered = sorted(
                layer for start, end, _ in ranges for layer in range(start, end + 1)
            )
            assert covered == list(range(1, 13)), label


class TestTraceExport:
    def test_frames_and_manifest(self, toy, toy_embeddings, tmp_path):
        trace = blend_sequence(toy, 3, 5, toy_embeddings)
        manifest_path = write_trace(trace, tmp_path)
        doc = json.loads(manifest_path.read_text())
        assert doc["seed"] == 3
        assert len(doc["steps"]) == 5
        for i, step in enumerate(doc["steps"]):
            frame = tmp_path / step["frame"]
            assert frame.name == f"frame_{i:03d}.png"
            pixels = png_decode(frame.read_bytes())
            assert np.array_equal(pixels, trace.steps[i].image.pixels)
            assert step["pred"] == list(trace.steps[i].prediction.values)

    def test_step_digests_stable(self, toy, toy_embeddings):
        t1 = blend_sequence(toy, 3, 3, toy_embeddings)
        t2 = blend_sequence(toy, 3, 3, toy_embeddings)
        assert [s.digest for s in t1.steps] == [s.digest for s in t2.steps]
