import numpy as np
import pytest

from polypdet.errors import ParameterError
from polypdet.evaluate import load_manifest
from polypdet.imaging import CircularMask
from polypdet.phantom import (
    PhantomSpec,
    detectable_radius_band,
    generate_dataset,
    generate_frame,
    normal_spec,
    polyp_sequence_specs,
)


class TestGenerateFrame:
    def test_shape_and_dtype(self):
        frame, truth = generate_frame(normal_spec(0, "flat"))
        assert frame.shape == (256, 256, 3)
        assert frame.dtype == np.uint8
        assert truth.label == "normal"
        assert truth.polyp_center is None

    def test_deterministic(self):
        a, _ = generate_frame(normal_spec(3, "folds"))
        b, _ = generate_frame(normal_spec(3, "folds"))
        assert np.array_equal(a, b)

    def test_seed_changes_frame(self):
        a, _ = generate_frame(normal_spec(3, "folds"))
        b, _ = generate_frame(normal_spec(4, "folds"))
        assert not np.array_equal(a, b)

    def test_outside_mask_constant(self):
        frame, _ = generate_frame(normal_spec(0, "flat"))
        mask = CircularMask.for_shape((256, 256))
        outside = ~mask.inside((256, 256))
        gray = frame[..., 0].astype(float)
        assert np.unique(gray[outside]).size == 1

    def test_polyp_truth(self):
        spec = polyp_sequence_specs(5, 3)[0]
        frame, truth = generate_frame(spec)
        assert truth.label == "polyp"
        cx, cy = truth.polyp_center
        assert truth.polyp_radius > 0
        assert truth.polyp_mask.sum() > 0
        # The polyp region is brighter than the frame average.
        gray = frame[..., 0].astype(float)
        assert gray[truth.polyp_mask].mean() > gray.mean()

    def test_unknown_kind(self):
        with pytest.raises(ParameterError):
            normal_spec(0, "sparkles")


class TestSequences:
    def test_radius_shrinks_by_factor_two(self):
        for seed in range(5):
            specs = polyp_sequence_specs(seed, 8)
            radii = [s.polyp.radius for s in specs]
            assert radii[0] / radii[-1] >= 2.0
            assert radii == sorted(radii, reverse=True)

    def test_near_radius_in_detectable_band(self):
        lo, hi = detectable_radius_band(256)
        for seed in range(5):
            specs = polyp_sequence_specs(seed, 8)
            assert lo <= specs[0].polyp.radius <= hi

    def test_polyp_inside_mask(self):
        mask = CircularMask.for_shape((256, 256))
        for seed in range(5):
            for spec in polyp_sequence_specs(seed, 6):
                pol = spec.polyp
                d = np.hypot(pol.center_x - mask.center_x,
                             pol.center_y - mask.center_y)
                assert d + pol.radius <= mask.radius


class TestDataset:
    def test_manifest_and_files(self, tmp_path):
        manifest = generate_dataset(
            tmp_path, n_polyp_sequences=2, frames_per_sequence=3, n_normal=6,
            seed=1,
        )
        records = load_manifest(manifest)
        assert len(records) == 2 * 3 + 6
        polyps = [r for r in records if r.label == "polyp"]
        normals = [r for r in records if r.label == "normal"]
        assert len(polyps) == 6
        assert len(normals) == 6
        assert {r.sequence for r in polyps} == {"seq00", "seq01"}
        assert all(r.sequence == "" for r in normals)
        # Patients split half and half for both classes.
        assert {r.patient for r in records} == {"1", "2"}
        assert sum(1 for r in normals if r.patient == "1") == 3
        from pathlib import Path

        assert all(Path(r.path).exists() for r in records)
