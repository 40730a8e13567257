import json

import httpx
import pytest

from conftest import scene_bytes
from vibroscene.agents import (
    HttpBackend,
    MockBackend,
    RecordingBackend,
    ReplayBackend,
    infer_scene,
    load_inferred,
    parse_agent_json,
    parse_material_properties,
    parse_object_analysis,
    parse_size_string,
    parse_vibration_description,
    run_material_estimator,
    run_object_analyzer,
    run_scene_analyzer,
    run_vibration_describer,
    serialize_inferred,
)
from vibroscene.errors import (
    BackendError,
    EstimationUnavailable,
    InvariantViolation,
    MalformedResponse,
)
from vibroscene.geometry import derive_geometry, load_scene
from vibroscene.materials import REFERENCE_MATERIALS, lookup_reference_material
from vibroscene.prompts import render_prompt


def smartphone_setup():
    scene = load_scene(scene_bytes("study2_smartphone"))
    return scene, derive_geometry(scene)


class ScriptedBackend(MockBackend):
    """Queue of canned responses for a single agent, for retry tests."""

    def __init__(self, agent, responses):
        super().__init__()
        self.agent = agent
        self.responses = list(responses)
        self.calls = 0

    def _complete(self, agent, prompt, images):
        if agent == self.agent:
            self.calls += 1
            return self.responses.pop(0) if len(self.responses) > 1 else self.responses[0]
        return super()._complete(agent, prompt, images)


class TestParsing:
    def test_material_json(self):
        props = parse_material_properties(
            '{"density": 7850, "youngs_modulus": 200, '
            '"poissons_ratio": 0.30, "damping_ratio": 0.01}'
        )
        assert props.density == 7850
        assert props.elastic_modulus == 200e9
        assert props.poissons_ratio == 0.30

    def test_code_fences_stripped(self):
        fenced = '```json\n{"density": 7850, "youngs_modulus": 200, ' \
                 '"poissons_ratio": 0.3, "damping_ratio": 0}\n```'
        assert parse_material_properties(fenced).density == 7850

    def test_missing_field_reported(self):
        doc = {
            "object_category": "pan", "object_category_reason": "r",
            "material_category": "steel", "estimated_size": "1,1,1",
            "estimated_size_reason": "r", "should_vibrate": True,
            "should_vibrate_reason": "r",
        }  # no usage
        with pytest.raises(MalformedResponse) as err:
            parse_object_analysis(json.dumps(doc))
        assert err.value.field == "usage"

    def test_all_zero_sentinel(self):
        raw = '{"density": 0, "youngs_modulus": 0, "poissons_ratio": 0, "damping_ratio": 0}'
        with pytest.raises(EstimationUnavailable):
            parse_material_properties(raw)

    def test_not_json(self):
        with pytest.raises(MalformedResponse):
            parse_agent_json("steel is dense", ("density",))

    @pytest.mark.parametrize("raw", ["1.0", "a,b,c", "1,2", "1,-1,1", [1, 2]])
    def test_bad_size_strings(self, raw):
        with pytest.raises(MalformedResponse):
            parse_size_string(raw)

    def test_size_string_and_list_forms(self):
        assert parse_size_string("1.0, 0.05 ,2.0").as_tuple() == (1.0, 0.05, 2.0)
        assert parse_size_string([1, 2, 3]).as_tuple() == (1.0, 2.0, 3.0)

    def test_key_alias_normalization(self):
        raw = json.dumps({
            "Density": 700, "Young's Modulus": 12,
            "Poisson's Ratio": 0.3, "Damping Ratio": 0.02,
        })
        props = parse_material_properties(raw)
        assert props.elastic_modulus == 12e9

    def test_vibration_invariants(self):
        with pytest.raises(InvariantViolation):
            parse_vibration_description(
                '{"free_form": "Phone buzzes", "keywords": "phone vibrate"}'
            )
        with pytest.raises(InvariantViolation):
            parse_vibration_description(
                '{"free_form": "Phone buzzes", "keywords": "buzz"}'
            )
        desc = parse_vibration_description(
            '{"free_form": "Phone buzzes on the desk", "keywords": "phone buzz"}'
        )
        assert desc.keywords == "phone buzz"


class TestMockBackend:
    def test_scene_rule_lookup(self):
        scene, _derived = smartphone_setup()
        assert run_scene_analyzer(scene, MockBackend()) == "Living Room"

    def test_unmatched_scene_name_is_undefined(self):
        scene, _ = smartphone_setup()
        scene = type(scene)(scene_name="mystery", scene_images=(),
                            objects=scene.objects)
        assert run_scene_analyzer(scene, MockBackend()) == "undefined"

    def test_washing_rule(self):
        scene = load_scene(scene_bytes("study2_washing_machine"))
        derived = derive_geometry(scene)
        analysis = run_object_analyzer(
            scene.get("washing_machine"), "Laundry Room", derived, MockBackend()
        )
        assert analysis.object_category == "washing machine"
        assert analysis.should_vibrate is True

    def test_object_analysis_echoes_manifest_size(self):
        scene, derived = smartphone_setup()
        analysis = run_object_analyzer(
            scene.get("smartphone"), "Living Room", derived, MockBackend()
        )
        assert analysis.estimated_size.as_tuple() == (0.07, 0.008, 0.15)

    def test_smartphone_vibration_rule(self):
        desc = run_vibration_describer(
            "smartphone", "It buzzes on the table.", MockBackend()
        )
        assert desc.free_form == "Smartphone buzzes rapidly on the table surface"
        assert desc.keywords == "smartphone buzz"

    def test_estimator_matches_lookup_exactly(self):
        backend = MockBackend()
        for name in REFERENCE_MATERIALS:
            estimated = run_material_estimator(name, backend)
            reference = lookup_reference_material(name)
            assert estimated.density == reference.density
            assert estimated.elastic_modulus == reference.elastic_modulus
            assert estimated.poissons_ratio == reference.poissons_ratio

    def test_unknown_material_gets_zero_sentinel(self):
        with pytest.raises(EstimationUnavailable):
            run_material_estimator("unobtainium", MockBackend())


class TestRetries:
    def test_recovers_from_one_malformed_response(self):
        good = json.dumps({"density": 700, "youngs_modulus": 12,
                           "poissons_ratio": 0.3, "damping_ratio": 0})
        backend = ScriptedBackend("material_estimator", ["garbage", good])
        props = run_material_estimator("oak", backend)
        assert props.density == 700
        assert backend.calls == 2

    def test_gives_up_after_retry_budget(self):
        backend = ScriptedBackend("material_estimator", ["garbage"])
        with pytest.raises(MalformedResponse):
            run_material_estimator("oak", backend)
        assert backend.calls == 4  # initial + 3 re-queries

    def test_invariant_violation_retried(self):
        bad = '{"free_form": "Phone buzzes", "keywords": "phone vibrate"}'
        good = '{"free_form": "Phone buzzes", "keywords": "phone buzz"}'
        backend = ScriptedBackend("vibration_describer", [bad, good])
        desc = run_vibration_describer("phone", "buzzing", backend)
        assert desc.keywords == "phone buzz"


class TestInferScene:
    def test_chaining_order_from_call_log(self):
        scene, derived = smartphone_setup()
        backend = MockBackend()
        inferred = infer_scene(scene, derived, backend)
        log = backend.log
        assert log[0].agent == "scene_analyzer"
        index = {}
        for record in log:
            index.setdefault((record.agent, record.tag), record.index)
        for oid in scene.object_ids():
            analyzer_at = index[("object_analyzer", oid)]
            assert analyzer_at > index[("scene_analyzer", None)]
            if (key := ("material_estimator", oid)) in index:
                assert index[key] > analyzer_at
            if (key := ("vibration_describer", oid)) in index:
                assert index[key] > analyzer_at
        # describer runs only for vibrating objects
        describer_tags = {r.tag for r in log if r.agent == "vibration_describer"}
        assert describer_tags == {"smartphone"}
        assert inferred.sources() == {"smartphone"}

    def test_no_vibrating_objects_no_descriptions(self):
        doc = {
            "scene_name": "plain", "scene_images": [],
            "objects": [{"id": "t", "name": "Wooden Table",
                         "position": [0, 0.4, 0], "size": [1, 0.05, 1]}],
        }
        scene = load_scene(json.dumps(doc).encode())
        inferred = infer_scene(scene, derive_geometry(scene), MockBackend())
        assert all(o.vibration is None for o in inferred.objects.values())

    def test_material_override_bypasses_estimator(self):
        doc = {
            "scene_name": "plain", "scene_images": [],
            "objects": [{"id": "t", "name": "Wooden Table",
                         "position": [0, 0.4, 0], "size": [1, 0.05, 1],
                         "material_override": "steel"}],
        }
        scene = load_scene(json.dumps(doc).encode())
        backend = MockBackend()
        inferred = infer_scene(scene, derive_geometry(scene), backend)
        assert all(r.agent != "material_estimator" for r in backend.log)
        assert inferred.objects["t"].material == lookup_reference_material("steel")

    def test_bit_deterministic_across_runs_and_workers(self):
        scene, derived = smartphone_setup()
        first = serialize_inferred(infer_scene(scene, derived, MockBackend()))
        second = serialize_inferred(infer_scene(scene, derived, MockBackend()))
        parallel = serialize_inferred(
            infer_scene(scene, derived, MockBackend(), max_workers=4)
        )
        assert first == second == parallel

    def test_parallel_run_keeps_per_object_order(self):
        scene, derived = smartphone_setup()
        backend = MockBackend()
        infer_scene(scene, derived, backend, max_workers=4)
        per_object: dict[str, list[str]] = {}
        for record in backend.log:
            if record.tag is not None:
                per_object.setdefault(record.tag, []).append(record.agent)
        for agents in per_object.values():
            assert agents[0] == "object_analyzer"

    def test_errors_annotated_with_object_id(self):
        doc = {
            "scene_name": "plain", "scene_images": [],
            "objects": [{"id": "mystery", "name": "Widget Gadget",
                         "position": [0, 0.4, 0], "size": [1, 0.05, 1],
                         "material_override": "unobtainium"}],
        }
        scene = load_scene(json.dumps(doc).encode())
        with pytest.raises(Exception) as err:
            infer_scene(scene, derive_geometry(scene), MockBackend())
        assert getattr(err.value, "object_id", None) == "mystery"

    def test_serialization_round_trip(self):
        scene, derived = smartphone_setup()
        inferred = infer_scene(scene, derived, MockBackend())
        reloaded = load_inferred(serialize_inferred(inferred))
        assert serialize_inferred(reloaded) == serialize_inferred(inferred)


class TestReplay:
    def test_record_then_replay_identical(self, tmp_path):
        scene, derived = smartphone_setup()
        recorder = RecordingBackend(MockBackend())
        recorded = serialize_inferred(infer_scene(scene, derived, recorder))
        path = tmp_path / "session.json"
        recorder.save(path)

        replay = ReplayBackend(path)
        replayed = serialize_inferred(infer_scene(scene, derived, replay))
        again = serialize_inferred(infer_scene(scene, derived, ReplayBackend(path)))
        assert recorded == replayed == again

    def test_replay_miss_is_backend_error(self):
        scene, derived = smartphone_setup()
        with pytest.raises(BackendError):
            infer_scene(scene, derived, ReplayBackend({}))


class TestHttpBackend:
    def make_backend(self, handler, **kwargs):
        transport = httpx.MockTransport(handler)
        return HttpBackend(endpoint="http://llm.test/v1/chat", api_key="k",
                           model="m", transport=transport, **kwargs)

    def test_payload_shape_and_response(self):
        seen = {}

        def handler(request):
            seen["payload"] = json.loads(request.content)
            seen["auth"] = request.headers.get("authorization")
            return httpx.Response(200, json={
                "choices": [{"message": {"content": "Kitchen"}}]
            })

        backend = self.make_backend(handler)
        out = backend.complete("scene_analyzer", "What scene is this?")
        assert out == "Kitchen"
        assert seen["auth"] == "Bearer k"
        payload = seen["payload"]
        assert payload["model"] == "m"
        assert payload["temperature"] == 0.2
        assert payload["messages"][0]["content"][0]["text"] == "What scene is this?"

    def test_image_attachments(self, tmp_path):
        img = tmp_path / "shot.png"
        img.write_bytes(b"\x89PNG fake")
        seen = {}

        def handler(request):
            seen["payload"] = json.loads(request.content)
            return httpx.Response(200, json={
                "choices": [{"message": {"content": "ok"}}]
            })

        backend = self.make_backend(handler)
        backend.complete("scene_analyzer", "p", images=(str(img), "missing.png"))
        content = seen["payload"]["messages"][0]["content"]
        assert len(content) == 2  # text + one readable image; absent file tolerated
        assert content[1]["image_url"]["url"].startswith("data:image/png;base64,")

    def test_non_200_is_backend_error(self):
        backend = self.make_backend(lambda request: httpx.Response(500, text="boom"))
        with pytest.raises(BackendError):
            backend.complete("scene_analyzer", "p")

    def test_missing_endpoint_is_backend_error(self, monkeypatch):
        monkeypatch.delenv("VIBROSCENE_LLM_ENDPOINT", raising=False)
        with pytest.raises(BackendError, match="VIBROSCENE_LLM_ENDPOINT"):
            HttpBackend()

    def test_temperature_bounds(self):
        with pytest.raises(ValueError):
            MockBackend(temperature=2.5)


def test_scene_analyzer_prompt_travels_to_backend():
    scene, _ = smartphone_setup()
    backend = MockBackend()
    run_scene_analyzer(scene, backend)
    assert backend.log[0].prompt == render_prompt(
        "scene_analyzer", {"scene_name": "study2_smartphone"}
    )
