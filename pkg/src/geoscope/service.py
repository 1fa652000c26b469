"""HTTP API for the expert validation workflow.

Workspaces hold uploaded documents, asynchronous annotation runs, an edit
log of expert deletions, and an export endpoint producing a MODS-TI bundle
that reflects those deletions. State is plain files on disk (MODS-TI XML
plus a JSON-lines edit log); endpoints are documented in docs/api.md.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import threading
import time
from pathlib import Path

from fastapi import FastAPI, HTTPException, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from . import ingest
from .model import AnnotatedDocument
from .modsxml import parse_mods_ti, serialize_mods_collection, serialize_mods_ti
from .pipeline import PipelineConfig, Resources, _annotate_one

log = logging.getLogger(__name__)

CHAINS = ("spatial", "temporal", "thematic")


class AnnotateRequest(BaseModel):
    chains: list[str] = Field(default=list(CHAINS))


def _annotation_payloads(doc: AnnotatedDocument) -> dict[str, list[dict]]:
    """Per-dimension payloads with stable annotation ids."""
    payloads: dict[str, list[dict]] = {}
    spatial = []
    for a in doc.spatial:
        item = {
            "ann_id": f"spatial-{a.start}-{a.end}",
            "dimension": "spatial",
            "start": a.start, "end": a.end, "surface_text": a.surface_text,
            "kind": a.kind.value,
            "indicator": a.indicator.value if a.indicator else None,
            "feature_noun": a.feature_noun,
            "resolution": None,
        }
        if a.resolution is not None:
            r = a.resolution
            item["resolution"] = {
                "gazetteer_id": r.gazetteer_id, "name": r.canonical_name,
                "lat": r.latitude, "lon": r.longitude,
                "feature_class": r.feature_class.value,
                "country": r.country_code, "score": r.score,
            }
        spatial.append(item)
    payloads["spatial"] = spatial
    payloads["temporal"] = [{
        "ann_id": f"temporal-{a.start}-{a.end}",
        "dimension": "temporal",
        "start": a.start, "end": a.end, "surface_text": a.surface_text,
        "timex_class": a.timex_class.value,
        "value_begin": a.value_begin.isoformat(),
        "value_end": a.value_end.isoformat() if a.value_end else None,
    } for a in doc.temporal]
    payloads["thematic"] = [{
        "ann_id": f"thematic-{a.start}-{a.end}",
        "dimension": "thematic",
        "start": a.start, "end": a.end, "surface_text": a.surface_text,
        "concept_uri": a.concept_uri, "pref_label": a.pref_label,
        "used_for": list(a.used_for),
        "broader": [{"uri": u, "label": l} for u, l in a.broader],
    } for a in doc.thematic]
    return payloads


def _strip_deleted(doc: AnnotatedDocument, deleted: set[str]) -> AnnotatedDocument:
    def keep(dimension, anns):
        return tuple(a for a in anns
                     if f"{dimension}-{a.start}-{a.end}" not in deleted)

    return AnnotatedDocument(
        record=doc.record,
        spatial=keep("spatial", doc.spatial),
        temporal=keep("temporal", doc.temporal),
        thematic=keep("thematic", doc.thematic),
    )


class Workspace:
    def __init__(self, root: Path):
        self.root = root
        self.docs_dir = root / "docs"
        self.annotated_dir = root / "annotated"
        self.edits_path = root / "edits.jsonl"
        self.status_path = root / "status.json"
        self.lock = threading.Lock()

    @property
    def workspace_id(self) -> str:
        return self.root.name

    def create(self):
        self.docs_dir.mkdir(parents=True)
        self.annotated_dir.mkdir()
        self._write_status({"status": "pending", "stages": {},
                            "document_count": 0, "error": None})

    def _write_status(self, status: dict):
        self.status_path.write_text(json.dumps(status, indent=2),
                                    encoding="utf-8")

    def status(self) -> dict:
        return json.loads(self.status_path.read_text(encoding="utf-8"))

    def doc_ids(self) -> list[str]:
        return sorted(p.stem for p in self.docs_dir.glob("*.xml"))

    def load_document(self, doc_id: str) -> AnnotatedDocument:
        annotated = self.annotated_dir / f"{doc_id}.xml"
        path = annotated if annotated.exists() else self.docs_dir / f"{doc_id}.xml"
        if not path.exists():
            raise KeyError(doc_id)
        return parse_mods_ti(path.read_text(encoding="utf-8"))

    def deletions(self) -> dict[str, set[str]]:
        deleted: dict[str, set[str]] = {}
        if self.edits_path.exists():
            for line in self.edits_path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    entry = json.loads(line)
                    deleted.setdefault(entry["doc_id"], set()).add(
                        entry["ann_id"])
        return deleted

    def append_deletion(self, doc_id: str, ann_id: str):
        entry = {"ts": time.time(), "doc_id": doc_id, "ann_id": ann_id,
                 "dimension": ann_id.split("-", 1)[0]}
        with self.lock:
            with open(self.edits_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry) + "\n")

    def current_document(self, doc_id: str) -> AnnotatedDocument:
        doc = self.load_document(doc_id)
        deleted = self.deletions().get(doc_id, set())
        return _strip_deleted(doc, deleted) if deleted else doc


class WorkspaceStore:
    def __init__(self, data_dir: Path, resources: Resources,
                 config: PipelineConfig):
        self.base = Path(data_dir) / "workspaces"
        self.base.mkdir(parents=True, exist_ok=True)
        self.resources = resources
        self.config = config
        self._running: dict[str, threading.Thread] = {}
        self._lock = threading.Lock()

    def create_workspace(self) -> Workspace:
        with self._lock:
            n = 1 + max((int(p.name.split("-")[1]) for p in self.base.iterdir()
                         if p.is_dir() and p.name.startswith("ws-")),
                        default=0)
            ws = Workspace(self.base / f"ws-{n:04d}")
            ws.create()
            return ws

    def get(self, workspace_id: str) -> Workspace:
        root = self.base / workspace_id
        if not root.is_dir():
            raise HTTPException(404, f"unknown workspace {workspace_id}")
        return Workspace(root)

    def is_running(self, workspace_id: str) -> bool:
        thread = self._running.get(workspace_id)
        return thread is not None and thread.is_alive()

    def add_documents(self, ws: Workspace, uploads: list[tuple[str, bytes]]
                      ) -> list[str]:
        added = []
        for filename, data in uploads:
            try:
                source = ingest.SourceFile(data, Path(filename))
                record = ingest.normalize(source)
            except (ingest.MalformedInput, ingest.MissingRequiredField) as exc:
                raise HTTPException(422, f"{filename}: {exc}") from exc
            doc = AnnotatedDocument(record=record)
            (ws.docs_dir / f"{record.doc_id}.xml").write_text(
                serialize_mods_ti(doc), encoding="utf-8")
            added.append(record.doc_id)
        status = ws.status()
        status["document_count"] = len(ws.doc_ids())
        ws._write_status(status)
        return added

    def start_annotation(self, ws: Workspace, chains: list[str]):
        bad = [c for c in chains if c not in CHAINS]
        if bad:
            raise HTTPException(422, f"unknown chains: {bad}")
        if self.is_running(ws.workspace_id):
            raise HTTPException(409, "annotation already running")
        status = ws.status()
        status.update(status="running", error=None)
        ws._write_status(status)
        thread = threading.Thread(
            target=self._run, args=(ws, tuple(chains)), daemon=True)
        self._running[ws.workspace_id] = thread
        thread.start()

    def _run(self, ws: Workspace, chains: tuple[str, ...]):
        started = time.perf_counter()
        try:
            results = []
            stage_totals: dict[str, float] = {}
            for doc_id in ws.doc_ids():
                record = parse_mods_ti(
                    (ws.docs_dir / f"{doc_id}.xml")
                    .read_text(encoding="utf-8")).record
                full, timings = _annotate_one(record, self.resources,
                                              self.config)
                doc = AnnotatedDocument(
                    record=record,
                    spatial=full.spatial if "spatial" in chains else (),
                    temporal=full.temporal if "temporal" in chains else (),
                    thematic=full.thematic if "thematic" in chains else (),
                )
                results.append(doc)
                for stage, seconds in timings.items():
                    stage_totals[stage] = stage_totals.get(stage, 0) + seconds
            with ws.lock:
                for doc in results:
                    (ws.annotated_dir / f"{doc.record.doc_id}.xml").write_text(
                        serialize_mods_ti(doc), encoding="utf-8")
            ws._write_status({
                "status": "done",
                "stages": {k: round(v, 6) for k, v in stage_totals.items()},
                "document_count": len(results),
                "chains": list(chains),
                "total_seconds": round(time.perf_counter() - started, 6),
                "error": None,
            })
        except Exception as exc:
            log.exception("annotation run failed in %s", ws.workspace_id)
            status = ws.status()
            status.update(status="failed", error=str(exc))
            ws._write_status(status)


def create_app(data_dir: str | Path,
               resources: Resources | None = None,
               config: PipelineConfig | None = None,
               frontend_dir: str | Path | None = None) -> FastAPI:
    resources = resources or Resources.default()
    config = config or PipelineConfig()
    store = WorkspaceStore(Path(data_dir), resources, config)
    app = FastAPI(title="geoscope", version="0.1.0")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    app.state.store = store

    @app.post("/workspaces", status_code=201)
    def create_workspace():
        ws = store.create_workspace()
        return {"workspace_id": ws.workspace_id}

    @app.post("/workspaces/{workspace_id}/documents")
    async def upload_documents(workspace_id: str, files: list[UploadFile]):
        ws = store.get(workspace_id)
        uploads = [(f.filename or "upload.xml", await f.read()) for f in files]
        doc_ids = store.add_documents(ws, uploads)
        return {"doc_ids": doc_ids}

    @app.get("/workspaces/{workspace_id}/documents")
    def list_documents(workspace_id: str):
        ws = store.get(workspace_id)
        out = []
        for doc_id in ws.doc_ids():
            record = ws.load_document(doc_id).record
            out.append({"doc_id": doc_id, "title": record.title,
                        "language": record.language.value,
                        "source": record.source.value})
        return {"documents": out}

    @app.get("/workspaces/{workspace_id}/documents/{doc_id}")
    def get_document(workspace_id: str, doc_id: str):
        ws = store.get(workspace_id)
        try:
            record = ws.load_document(doc_id).record
        except KeyError:
            raise HTTPException(404, f"unknown document {doc_id}")
        return {"doc_id": record.doc_id, "title": record.title,
                "abstract": record.abstract,
                "language": record.language.value,
                "source": record.source.value,
                "creation_date": record.creation_date.isoformat()
                if record.creation_date else None}

    @app.post("/workspaces/{workspace_id}/annotate", status_code=202)
    def annotate(workspace_id: str, request: AnnotateRequest):
        ws = store.get(workspace_id)
        store.start_annotation(ws, request.chains)
        return {"status": "running", "chains": request.chains}

    @app.get("/workspaces/{workspace_id}/status")
    def status(workspace_id: str):
        ws = store.get(workspace_id)
        data = ws.status()
        if store.is_running(workspace_id):
            data["status"] = "running"
        return data

    @app.get("/workspaces/{workspace_id}/documents/{doc_id}/annotations")
    def annotations(workspace_id: str, doc_id: str,
                    dimension: str | None = None):
        ws = store.get(workspace_id)
        try:
            doc = ws.current_document(doc_id)
        except KeyError:
            raise HTTPException(404, f"unknown document {doc_id}")
        payloads = _annotation_payloads(doc)
        if dimension is not None:
            if dimension not in CHAINS:
                raise HTTPException(422, f"unknown dimension {dimension}")
            return {"doc_id": doc_id, "annotations": payloads[dimension]}
        merged = [item for dim in CHAINS for item in payloads[dim]]
        return {"doc_id": doc_id, "annotations": merged}

    @app.delete("/workspaces/{workspace_id}/documents/{doc_id}"
                "/annotations/{ann_id}")
    def delete_annotation(workspace_id: str, doc_id: str, ann_id: str):
        ws = store.get(workspace_id)
        try:
            doc = ws.current_document(doc_id)
        except KeyError:
            raise HTTPException(404, f"unknown document {doc_id}")
        payloads = _annotation_payloads(doc)
        known = {item["ann_id"] for dim in CHAINS for item in payloads[dim]}
        if ann_id not in known:
            raise HTTPException(404, f"unknown annotation {ann_id}")
        ws.append_deletion(doc_id, ann_id)
        return {"deleted": ann_id}

    @app.get("/workspaces/{workspace_id}/export")
    def export(workspace_id: str):
        ws = store.get(workspace_id)
        docs = [ws.current_document(doc_id) for doc_id in ws.doc_ids()]
        xml = serialize_mods_collection(docs)
        return Response(content=xml, media_type="application/xml",
                        headers={"Content-Disposition":
                                 f'attachment; filename="{workspace_id}.xml"'})

    if frontend_dir is not None and Path(frontend_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=frontend_dir, html=True),
                  name="ui")
    return app
