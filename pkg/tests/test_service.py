import json

import numpy as np
import pytest
from fastapi.testclient import TestClient
from PIL import Image

from kurdocr.corpus import scan_corpus, split
from kurdocr.engine import expected_corruption_cer
from kurdocr.raster import encode_png, BinaryImage
from kurdocr.service import (CONFIRMED, DRAFT, UNLABELED, AnnotationStore,
                             ServiceConfig, ValidationFailed, WriteConflict,
                             create_app, load_config, read_journal,
                             replay_journal, text_hash)

from conftest import sample_lines


@pytest.fixture
def store(synth_corpus_dir):
    s = AnnotationStore(synth_corpus_dir)
    s.mount()
    return s


@pytest.fixture
def client(synth_corpus_dir):
    # persist a split so eval runs have an eval subset
    manifest = split(scan_corpus(synth_corpus_dir), 0.5, seed=1)
    state_dir = synth_corpus_dir / ".kurdocr"
    state_dir.mkdir(exist_ok=True)
    manifest.save(state_dir / "manifest.json")
    config = ServiceConfig(corpus_root=str(synth_corpus_dir),
                           default_profile="mock:echo-gt", max_image_mb=8)
    return TestClient(create_app(config))


# -------------------------------------------------------------- store

def test_mount_builds_draft_tasks(store):
    assert len(store.tasks) == 12
    assert all(t.status == DRAFT for t in store.tasks.values())


def test_next_task_lowest_id(store):
    task = store.next_task()
    assert task.task_id == sorted(store.tasks)[0]


def test_save_draft_and_confirm(store):
    task = store.next_task()
    updated = store.save_transcript(task.task_id, "سڵاو", confirm=False)
    assert updated.status == DRAFT
    confirmed = store.save_transcript(task.task_id, "سڵاو", confirm=True)
    assert confirmed.status == CONFIRMED
    entries = read_journal(store.journal_path)
    assert [e.action for e in entries] == ["save_draft", "confirm"]
    assert entries[-1].text_hash == text_hash("سڵاو")


def test_confirm_validates(store):
    task = store.next_task()
    with pytest.raises(ValidationFailed) as err:
        store.save_transcript(task.task_id, "bad\nline", confirm=True)
    kinds = {i.kind for i in err.value.issues}
    assert "ContainsNewline" in kinds
    # drafts may carry issues
    saved = store.save_transcript(task.task_id, "bad\nline", confirm=False)
    assert saved.status == DRAFT


def test_cas_conflict(store):
    task = store.next_task()
    token = task.updated
    store.save_transcript(task.task_id, "سڵاو", confirm=False, expected_updated=token)
    with pytest.raises(WriteConflict):
        store.save_transcript(task.task_id, "باش", confirm=False,
                              expected_updated=token)


def test_transcript_written_to_corpus_file(store, synth_corpus_dir):
    task = store.next_task()
    store.save_transcript(task.task_id, "نووسین", confirm=True)
    from pathlib import Path
    assert Path(task.gt_path).read_text(encoding="utf-8") == "نووسین"


def test_journal_replay_matches_state(store):
    ids = sorted(store.tasks)[:3]
    store.save_transcript(ids[0], "یەک", confirm=True)
    store.save_transcript(ids[1], "دوو", confirm=False)
    store.save_transcript(ids[2], "سێ", confirm=True)
    store.reopen(ids[2])
    state = replay_journal(read_journal(store.journal_path))
    assert state[ids[0]] == (CONFIRMED, text_hash("یەک"))
    assert state[ids[1]] == (DRAFT, text_hash("دوو"))
    assert state[ids[2]][0] == DRAFT


def test_remount_restores_statuses(store, synth_corpus_dir):
    ids = sorted(store.tasks)[:2]
    store.save_transcript(ids[0], "یەک", confirm=True)
    fresh = AnnotationStore(synth_corpus_dir)
    fresh.mount()
    assert fresh.tasks[ids[0]].status == CONFIRMED
    assert fresh.tasks[ids[0]].current_transcript == "یەک"
    assert fresh.tasks[ids[1]].status == DRAFT


def test_mount_reconciles_outside_edit(store, synth_corpus_dir):
    ids = sorted(store.tasks)[:1]
    store.save_transcript(ids[0], "یەک", confirm=True)
    # simulate a write that never reached the journal
    from pathlib import Path
    Path(store.tasks[ids[0]].gt_path).write_text("چاککراو", encoding="utf-8")
    fresh = AnnotationStore(synth_corpus_dir)
    fresh.mount()
    assert fresh.tasks[ids[0]].status == DRAFT
    entries = read_journal(fresh.journal_path)
    assert entries[-1].text_hash == text_hash("چاککراو")
    # replay now matches the directory again
    state = replay_journal(entries)
    assert state[ids[0]][1] == text_hash("چاککراو")


def test_unlabeled_orphan_image_becomes_task(tmp_path):
    arr = np.zeros((5, 5), dtype=np.uint8)
    Image.fromarray(arr, mode="L").save(tmp_path / "new.png")
    s = AnnotationStore(tmp_path)
    s.mount()
    assert s.tasks["new"].status == UNLABELED
    s.save_transcript("new", "تازە", confirm=True)
    assert (tmp_path / "new.png.gt.txt").read_text(encoding="utf-8") == "تازە"


# ---------------------------------------------------------------- http

def test_health(client):
    data = client.get("/api/health").json()
    assert data["status"] == "ok"
    assert data["corpus_mounted"] is True


def test_ocr_endpoint_fixed_engine(client):
    png = encode_png(BinaryImage(np.zeros((12, 12), dtype=np.uint8), 300.0))
    resp = client.post("/api/ocr?profile=mock:fixed:سڵاو&by_line=false",
                       content=png, headers={"content-type": "image/png"})
    assert resp.status_code == 200
    assert resp.json()["text"] == "سڵاو"


def test_ocr_endpoint_multipart(client):
    png = encode_png(BinaryImage(np.zeros((12, 12), dtype=np.uint8), 300.0))
    resp = client.post("/api/ocr?profile=mock:fixed:ok&by_line=false",
                       files={"image": ("page.png", png, "image/png")})
    assert resp.status_code == 200
    assert resp.json()["text"] == "ok"


def test_ocr_endpoint_undecodable_is_415(client):
    resp = client.post("/api/ocr", content=b"x",
                       headers={"content-type": "application/octet-stream"})
    assert resp.status_code == 415


def test_ocr_endpoint_oversize_is_413(client):
    resp = client.post("/api/ocr", content=b"\x89PNG" + b"0" * (9 * 1024 * 1024),
                       headers={"content-type": "image/png"})
    assert resp.status_code == 413


def test_ocr_endpoint_engine_failure_is_502(client):
    png = encode_png(BinaryImage(np.zeros((12, 12), dtype=np.uint8), 300.0))
    resp = client.post("/api/ocr?profile=mock:echo-gt&by_line=false", content=png,
                       headers={"content-type": "image/png"})
    assert resp.status_code == 502


def test_task_cycle_over_http(client):
    task = client.get("/api/tasks/next").json()
    resp = client.put(f"/api/tasks/{task['task_id']}/transcript",
                      json={"text": "سڵاو", "confirm": True})
    assert resp.status_code == 204
    got = client.get(f"/api/tasks/{task['task_id']}").json()
    assert got["current_transcript"] == "سڵاو"
    assert got["status"] == "confirmed"
    following = client.get("/api/tasks/next").json()
    assert following["task_id"] != task["task_id"]


def test_put_validation_failure_is_422(client):
    task = client.get("/api/tasks/next").json()
    resp = client.put(f"/api/tasks/{task['task_id']}/transcript",
                      json={"text": "a\nb", "confirm": True})
    assert resp.status_code == 422
    kinds = {i["kind"] for i in resp.json()["issues"]}
    assert "ContainsNewline" in kinds


def test_put_conflict_is_409(client):
    task = client.get("/api/tasks/next").json()
    token = task["updated"]
    first = client.put(f"/api/tasks/{task['task_id']}/transcript",
                       json={"text": "سڵاو", "confirm": False,
                             "expected_updated": token})
    assert first.status_code == 204
    second = client.put(f"/api/tasks/{task['task_id']}/transcript",
                        json={"text": "باش", "confirm": False,
                              "expected_updated": token})
    assert second.status_code == 409


def test_unknown_task_404(client):
    assert client.get("/api/tasks/zzz").status_code == 404
    resp = client.put("/api/tasks/zzz/transcript", json={"text": "x"})
    assert resp.status_code == 404


def test_task_image_served(client):
    task = client.get("/api/tasks/next").json()
    resp = client.get(task["image_url"])
    assert resp.status_code == 200
    assert resp.headers["content-type"] == "image/png"
    assert resp.content[:4] == b"\x89PNG"


def test_prefill_ocr_uses_engine(client):
    # make the first task unlabeled so prefill applies
    task = client.get("/api/tasks/next").json()
    store = client.app.state.store
    store.tasks[task["task_id"]].current_transcript = None
    store.tasks[task["task_id"]].status = "unlabeled"
    gt = store.manifest.pair_by_id(task["task_id"]).transcript
    got = client.get("/api/tasks/next?prefill=ocr").json()
    assert got["task_id"] == task["task_id"]
    assert got["current_transcript"] == gt


def test_corpus_stats_endpoint(client):
    data = client.get("/api/corpus/stats").json()
    assert data["total_lines"] == 12
    assert data["rows"][0]["publication"] == "synthetic"
    assert data["rows"][0]["year"] == 1939


def test_eval_run_echo_gt_is_perfect(client):
    resp = client.post("/api/eval/run", json={"profile": "mock:echo-gt"})
    assert resp.status_code == 200
    report_id = resp.json()["report_id"]
    report = client.get(f"/api/eval/report/{report_id}").json()
    assert report["errors"] == 0
    assert report["accuracy_display"] == "100.00"
    assert len(report["documents"]) == 6  # half of 12 pairs in the split
    assert report["parameters"]["profile"] == "mock:echo-gt"


def test_eval_run_corrupt_near_expectation(client):
    resp = client.post("/api/eval/run",
                       json={"profile": "mock:corrupt:0.1:7", "split": "all"})
    report = client.get(f"/api/eval/report/{resp.json()['report_id']}").json()
    store = client.app.state.store
    gt_all = "".join(p.transcript for p in store.manifest.pairs)
    expected = expected_corruption_cer(gt_all, 0.1)
    measured = report["errors"] / report["chars"]
    assert abs(measured - expected) <= 0.05  # small corpus, loose bound


def test_eval_inject_table_fixture(client):
    rows = [{"doc_id": "deste", "chars": 667, "errors": 105},
            {"doc_id": "mihasebeyi", "chars": 787, "errors": 152},
            {"doc_id": "awat", "chars": 735, "errors": 157},
            {"doc_id": "awrreki", "chars": 1297, "errors": 143}]
    resp = client.post("/api/eval/report", json={"rows": rows})
    report = client.get(f"/api/eval/report/{resp.json()['report_id']}").json()
    assert report["chars"] == 3486
    assert report["errors"] == 557
    assert report["accuracy_display"] == "84.02"
    displays = [d["accuracy_display"] for d in report["documents"]]
    assert displays == ["84.26", "80.69", "78.64", "88.97"]


def test_unknown_report_404(client):
    assert client.get("/api/eval/report/nope").status_code == 404


def test_no_corpus_is_503():
    app = create_app(ServiceConfig(corpus_root=None))
    bare = TestClient(app)
    assert bare.get("/api/tasks/next").status_code == 503
    assert bare.get("/api/corpus/stats").status_code == 503
    assert bare.get("/api/health").json()["corpus_mounted"] is False


def test_config_env_overrides(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"port": 9000, "max_image_mb": 16}))
    cfg = load_config(cfg_path, env={"KURDOCR_PORT": "9100",
                                     "KURDOCR_PROFILE": "mock:echo-gt"})
    assert cfg.port == 9100
    assert cfg.max_image_mb == 16
    assert cfg.default_profile == "mock:echo-gt"
