"""Model factory: parameter counts, freeze policies, ablation listing, export."""

import numpy as np
import pytest

from lesiontl.errors import FreezePolicyError, SpecError, WeightLoadError
from lesiontl.models import (
    FreezePolicy,
    ModelSpec,
    ablated_spec,
    apply_freeze_policy,
    build_model,
    list_removable_head_layers,
    load_model,
    weights_digest,
    write_summary_csv,
)

# independent architecture tables for the closed-form parameter oracle:
# conv layers as (kernel, c_in, c_out), spatial sizes tracked separately
VGG16_CONVS = [
    (3, 3, 64), (3, 64, 64),
    (3, 64, 128), (3, 128, 128),
    (3, 128, 256), (3, 256, 256), (3, 256, 256),
    (3, 256, 512), (3, 512, 512), (3, 512, 512),
    (3, 512, 512), (3, 512, 512), (3, 512, 512),
]
VGG19_CONVS = [
    (3, 3, 64), (3, 64, 64),
    (3, 64, 128), (3, 128, 128),
    (3, 128, 256), (3, 256, 256), (3, 256, 256), (3, 256, 256),
    (3, 256, 512), (3, 512, 512), (3, 512, 512), (3, 512, 512),
    (3, 512, 512), (3, 512, 512), (3, 512, 512), (3, 512, 512),
]
ALEXNET_CONVS = [(11, 3, 64), (5, 64, 192), (3, 192, 384), (3, 384, 256), (3, 256, 256)]

FEATURE_DIMS = {"vgg16": 7 * 7 * 512, "vgg19": 7 * 7 * 512, "alexnet_modified": 6 * 6 * 256}
CONV_TABLES = {"vgg16": VGG16_CONVS, "vgg19": VGG19_CONVS, "alexnet_modified": ALEXNET_CONVS}


def conv_params(k, c_in, c_out):
    return k * k * c_in * c_out + c_out


def fc_params(n_in, n_out):
    return n_in * n_out + n_out


def closed_form_total(backbone_id, head_widths, num_classes=2):
    total = sum(conv_params(*c) for c in CONV_TABLES[backbone_id])
    n_in = FEATURE_DIMS[backbone_id]
    for width in head_widths:
        total += fc_params(n_in, width)
        n_in = width
    return total + fc_params(n_in, num_classes)


def small_spec(backbone_id, **kw):
    defaults = dict(pretrained=False, head_widths=(8,), dropout_rate=0.0)
    defaults.update(kw)
    return ModelSpec(backbone_id=backbone_id, **defaults)


@pytest.mark.parametrize("backbone_id", ["vgg16", "vgg19", "alexnet_modified"])
def test_parameter_counts_match_closed_form(backbone_id):
    spec = small_spec(backbone_id)
    model, summary = build_model(spec, seed=0)
    assert summary.total_params == closed_form_total(backbone_id, spec.head_widths)
    # per-layer conv counts too
    conv_rows = [r for r in summary.layers if r.kind == "conv"]
    for row, (k, c_in, c_out) in zip(conv_rows, CONV_TABLES[backbone_id]):
        assert row.params == conv_params(k, c_in, c_out), row.name


def test_vgg_backbone_totals_match_reference_constants():
    # cross-check against the widely published conv-stack totals
    assert sum(conv_params(*c) for c in VGG16_CONVS) == 14_714_688
    assert sum(conv_params(*c) for c in VGG19_CONVS) == 20_024_384
    assert sum(conv_params(*c) for c in ALEXNET_CONVS) == 2_469_696


def test_final_layer_has_num_classes_outputs():
    model, summary = build_model(small_spec("vgg19", head_widths=(4096, 4096)), seed=0)
    assert summary.layers[-1].name == "output"
    assert summary.layers[-1].output_shape == (2,)


def test_forward_on_zero_image_is_a_probability_vector():
    model, _ = build_model(small_spec("alexnet_modified"), seed=1)
    p = model.forward(np.zeros((1, 224, 224, 3), dtype=np.float32))
    assert p.shape == (1, 2)
    assert np.all(p >= 0) and np.all(p <= 1)
    assert p.sum() == pytest.approx(1.0, abs=1e-6)


def test_freeze_first_three_conv_layers():
    spec = small_spec("vgg16", freeze=FreezePolicy(freeze_first_n=3))
    model, summary = build_model(spec, seed=0)
    frozen = [r.name for r in summary.layers if r.kind == "conv" and not r.trainable]
    assert frozen == ["conv1_1", "conv1_2", "conv2_1"]
    expected_frozen = sum(conv_params(*c) for c in VGG16_CONVS[:3])
    assert summary.trainable_params == summary.total_params - expected_frozen


def test_freeze_zero_means_all_trainable():
    model, summary = build_model(small_spec("vgg19", freeze=FreezePolicy(0)), seed=0)
    assert summary.trainable_params == summary.total_params


def test_freeze_backbone_rest_keeps_head_trainable():
    spec = small_spec("alexnet_modified", freeze=FreezePolicy(3, freeze_backbone_rest=True))
    model, summary = build_model(spec, seed=0)
    by_name = {r.name: r for r in summary.layers}
    assert all(not by_name[f"conv{i}"].trainable for i in range(1, 6))
    assert by_name["fc1"].trainable and by_name["output"].trainable


def test_freeze_beyond_backbone_is_a_policy_error():
    model, _ = build_model(small_spec("alexnet_modified"), seed=0)
    with pytest.raises(FreezePolicyError):
        apply_freeze_policy(model, FreezePolicy(freeze_first_n=6))


def test_reapplying_freeze_policy_unfreezes():
    model, _ = build_model(small_spec("alexnet_modified", freeze=FreezePolicy(3)), seed=0)
    summary = apply_freeze_policy(model, FreezePolicy(0))
    assert summary.trainable_params == summary.total_params


def test_removable_head_layers():
    assert list_removable_head_layers(small_spec("vgg16", head_widths=(4096, 4096))) == ["fc1", "fc2"]
    assert list_removable_head_layers(small_spec("vgg16", head_widths=(256,))) == ["fc1"]


def test_ablated_rebuild_drops_exactly_one_summary_row():
    spec = small_spec("alexnet_modified", head_widths=(16, 8))
    _, baseline = build_model(spec, seed=0)
    for layer in list_removable_head_layers(spec):
        _, ablated = build_model(ablated_spec(spec, layer), seed=0)
        assert len(ablated.layers) == len(baseline.layers) - 1


def test_spec_validation_errors():
    with pytest.raises(SpecError):
        build_model(ModelSpec(backbone_id="vgg16", head_widths=()))
    with pytest.raises(SpecError):
        build_model(ModelSpec(backbone_id="resnet"))
    with pytest.raises(SpecError):
        build_model(ModelSpec(backbone_id="vgg16", num_classes=1))
    with pytest.raises(SpecError):
        build_model(ModelSpec(backbone_id="vgg16", dropout_rate=1.0))


def test_missing_pretrained_weights_is_weight_load_error(tmp_path, monkeypatch):
    monkeypatch.setenv("LESIONTL_CACHE", str(tmp_path))
    with pytest.raises(WeightLoadError):
        build_model(small_spec("alexnet_modified", pretrained=True), seed=0)


def test_pretrained_weights_load_from_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("LESIONTL_CACHE", str(tmp_path))
    donor, _ = build_model(small_spec("alexnet_modified"), seed=99)
    arrays = {}
    for name in donor.backbone_param_layers:
        layer = donor.get_layer(name)
        for pname, arr in layer.params.items():
            arrays[f"{name}.{pname}"] = arr
    np.savez(tmp_path / "alexnet_modified.npz", **arrays)

    model, _ = build_model(small_spec("alexnet_modified", pretrained=True), seed=0)
    assert model.pretrained_provenance is not None
    assert len(model.pretrained_provenance["sha256"]) == 64
    for name in model.backbone_param_layers:
        layer = model.get_layer(name)
        for pname in layer.params:
            assert np.array_equal(layer.params[pname], arrays[f"{name}.{pname}"])


def test_pretrained_shape_mismatch_is_rejected(tmp_path, monkeypatch):
    monkeypatch.setenv("LESIONTL_CACHE", str(tmp_path))
    np.savez(tmp_path / "alexnet_modified.npz", **{"conv1.W": np.zeros((3, 3, 3, 8))})
    with pytest.raises(WeightLoadError):
        build_model(small_spec("alexnet_modified", pretrained=True), seed=0)


def test_export_and_reload_round_trip(tmp_path):
    spec = small_spec("alexnet_modified", head_widths=(8,), dropout_rate=0.5)
    model, _ = build_model(spec, seed=5)
    from lesiontl.models import export_model

    info = export_model(model, spec, tmp_path / "export")
    reloaded, loaded_spec = load_model(tmp_path / "export")
    assert loaded_spec == spec
    assert weights_digest(reloaded) == info["weights_digest"]
    x = np.random.default_rng(0).random((2, 224, 224, 3), dtype=np.float32)
    assert np.array_equal(model.forward(x), reloaded.forward(x))


def test_weights_digest_tracks_content(tmp_path):
    model, _ = build_model(small_spec("alexnet_modified"), seed=0)
    before = weights_digest(model)
    layer = model.get_layer("fc1")
    layer.params["b"] = layer.params["b"] + 1.0
    assert weights_digest(model) != before


def test_summary_csv_schema(tmp_path):
    _, summary = build_model(small_spec("alexnet_modified"), seed=0)
    path = tmp_path / "summary.csv"
    write_summary_csv(summary, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "name,kind,output_shape,params,trainable"
    assert lines[1].startswith("conv1,conv,55x55x64,23296,")
