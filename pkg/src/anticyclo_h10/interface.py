"""File formats (curve fixtures, externals, certificates) and a cached LMFDB client."""

from __future__ import annotations

import json
import math
import os
import tempfile
import threading
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

from .certifier import Certificate, ExternalDatum, Provenance
from .curves import WeierstrassModel
from .local_data import conductor_Q

SCHEMA_VERSION = "1"
DEFAULT_BASE_URL = "https://www.lmfdb.org"
ENV_BASE_URL = "ANTICYCLO_LMFDB_URL"
ENV_CACHE_DIR = "ANTICYCLO_CACHE_DIR"


class FormatError(ValueError):
    pass


class NotFound(LookupError):
    pass


class Unavailable(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# curve fixtures


@dataclass(frozen=True)
class CurveFixture:
    label: str
    ainvs: tuple[int, ...]
    conductor: int
    local: dict = field(default_factory=dict, compare=False, hash=False)
    source: str = "user"

    @property
    def model(self) -> WeierstrassModel:
        return WeierstrassModel.from_ints(self.ainvs)

    def check_conductor(self) -> None:
        computed = math.prod(ell**e for ell, e in conductor_Q(self.model).items())
        if computed != self.conductor:
            raise FormatError(f"{self.label}: conductor {self.conductor} disagrees with computed {computed}")

    def to_dict(self) -> dict:
        return {"label": self.label, "ainvs": [str(a) for a in self.ainvs], "conductor": str(self.conductor),
                "local": self.local, "source": self.source}

    @classmethod
    def from_dict(cls, d: Mapping, source: str | None = None) -> CurveFixture:
        try:
            ainvs = tuple(_exact_int(a) for a in d["ainvs"])
            if len(ainvs) != 5:
                raise FormatError("ainvs must have five entries")
            return cls(str(d["label"]), ainvs, _exact_int(d["conductor"]), dict(d.get("local", {})),
                       source or str(d.get("source", "user")))
        except KeyError as exc:
            raise FormatError(f"fixture missing field {exc}") from None


def _exact_int(x: Any) -> int:
    if isinstance(x, bool):
        raise FormatError("booleans are not integers")
    if isinstance(x, int):
        return x
    if isinstance(x, str) and x.strip().lstrip("+-").isdigit():
        return int(x)
    raise FormatError(f"{x!r} is not an exact integer")


def _data_text(name: str) -> str:
    return resources.files("anticyclo_h10").joinpath("data", name).read_text()


def bundled_fixtures() -> dict[str, CurveFixture]:
    doc = json.loads(_data_text("curves.json"))
    return {c["label"]: CurveFixture.from_dict(c, "bundled") for c in doc["curves"]}


def load_fixture_file(path: str | Path) -> CurveFixture:
    return CurveFixture.from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# externals


def parse_externals(doc: Mapping) -> tuple[dict[str, ExternalDatum], dict]:
    if str(doc.get("schema_version")) != SCHEMA_VERSION:
        raise FormatError(f"unsupported externals schema {doc.get('schema_version')!r}")
    out = {}
    for name, rec in doc.get("externals", {}).items():
        value = rec.get("value")
        try:
            prov = Provenance(rec.get("provenance", "ingested-user"))
        except ValueError:
            raise FormatError(f"{name}: unknown provenance {rec.get('provenance')!r}") from None
        if prov is Provenance.COMPUTED:
            raise FormatError(f"{name}: externals cannot claim provenance 'computed'")
        out[name] = ExternalDatum(name, None if value is None else _exact_int(value), prov,
                                  str(rec.get("citation", "")))
    return out, dict(doc.get("local_overrides", {}))


def load_externals(path: str | Path) -> tuple[dict[str, ExternalDatum], dict]:
    return parse_externals(json.loads(Path(path).read_text()))


def bundled_externals() -> tuple[dict[str, ExternalDatum], dict]:
    return parse_externals(json.loads(_data_text("example_externals.json")))


# ---------------------------------------------------------------------------
# certificate documents


@dataclass(frozen=True)
class CertificateDocument:
    schema_version: str
    instance: dict
    hypotheses: list
    reports: dict
    conclusion: str
    toolchain: dict

    @classmethod
    def from_certificate(cls, cert: Certificate) -> CertificateDocument:
        d = cert.to_dict()
        reports = {"rank_equation": d["rank_equation"], "lambda_report": d["lambda_report"],
                   "extras": d["extras"]}
        return cls(d["schema_version"], d["instance"], d["hypotheses"], reports, d["conclusion"], d["toolchain"])

    def to_json(self) -> str:
        doc = {"schema_version": self.schema_version, "instance": self.instance, "hypotheses": self.hypotheses,
               "reports": self.reports, "conclusion": self.conclusion, "toolchain": self.toolchain}
        return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> CertificateDocument:
        doc = json.loads(text)
        if str(doc.get("schema_version")) != SCHEMA_VERSION:
            raise FormatError(f"unsupported certificate schema {doc.get('schema_version')!r}")
        try:
            return cls(doc["schema_version"], doc["instance"], doc["hypotheses"], doc["reports"],
                       doc["conclusion"], doc["toolchain"])
        except KeyError as exc:
            raise FormatError(f"certificate missing field {exc}") from None


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


# ---------------------------------------------------------------------------
# LMFDB client


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_CACHE_DIR)
    return Path(env) if env else Path.home() / ".cache" / "anticyclo-h10"


def default_base_url() -> str:
    return os.environ.get(ENV_BASE_URL, DEFAULT_BASE_URL).rstrip("/")


class LMFDBClient:
    """Fetches curve records by Cremona label, with a file cache and a request rate limit."""

    def __init__(self, base_url: str | None = None, cache_dir: str | Path | None = None,
                 offline: bool = False, min_interval: float = 1.0, timeout: float = 20.0):
        self.base_url = (base_url or default_base_url()).rstrip("/")
        self.cache_dir = Path(cache_dir) if cache_dir else default_cache_dir()
        self.offline = offline
        self.min_interval = min_interval
        self.timeout = timeout
        self._lock = threading.Lock()
        self._last = 0.0

    def _cache_path(self, label: str) -> Path:
        safe = "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in label)
        return self.cache_dir / f"{safe}.json"

    def url_for(self, label: str) -> str:
        query = urllib.parse.urlencode({"Clabel": label, "_format": "json"})
        return f"{self.base_url}/api/ec_curvedata/?{query}"

    def _get(self, url: str) -> str:
        with self._lock:
            wait = self._last + self.min_interval - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            try:
                with urllib.request.urlopen(url, timeout=self.timeout) as resp:
                    body = resp.read().decode("utf-8")
            except urllib.error.HTTPError as exc:
                if exc.code == 404:
                    raise NotFound(f"{url} returned 404") from None
                raise Unavailable(f"request to {url} failed: HTTP {exc.code}") from None
            except (urllib.error.URLError, OSError) as exc:
                raise Unavailable(f"request to {url} failed: {exc}") from None
            finally:
                self._last = time.monotonic()
        return body

    @staticmethod
    def parse_body(label: str, body: str) -> CurveFixture:
        try:
            doc = json.loads(body)
        except json.JSONDecodeError as exc:
            raise Unavailable(f"malformed response for {label}: {exc}") from None
        rows = doc.get("data", []) if isinstance(doc, dict) else []
        rows = [r for r in rows if r.get("Clabel", label) == label]
        if not rows:
            raise NotFound(f"curve {label!r} not found")
        row = rows[0]
        return CurveFixture(label, tuple(_exact_int(a) for a in row["ainvs"]), _exact_int(row["conductor"]),
                            {}, "lmfdb")

    def fetch_curve(self, label: str) -> CurveFixture:
        path = self._cache_path(label)
        if path.exists():
            return self.parse_body(label, path.read_text())
        if self.offline:
            raise Unavailable(f"{label!r} is not cached and the client is offline")
        body = self._get(self.url_for(label))
        fixture = self.parse_body(label, body)
        write_atomic(path, body)
        return fixture


def fetch_curve(label: str, cache_dir: str | Path | None = None, base_url: str | None = None,
                offline: bool = False) -> CurveFixture:
    return LMFDBClient(base_url, cache_dir, offline).fetch_curve(label)


def resolve_curve(source: str, offline: bool = False, client: LMFDBClient | None = None) -> CurveFixture:
    """A curve from a fixture file path, the bundled corpus, or the LMFDB client."""
    path = Path(source)
    if path.suffix == ".json" or path.exists():
        if not path.exists():
            raise FileNotFoundError(source)
        return load_fixture_file(path)
    bundled = bundled_fixtures()
    if source in bundled:
        return bundled[source]
    client = client or LMFDBClient(offline=offline)
    if offline:
        client.offline = True
    return client.fetch_curve(source)
