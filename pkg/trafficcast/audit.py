import json
import logging
import os

from cryptography.hazmat.primitives import hashes

logger = logging.getLogger(__name__)

CHUNK_SIZE = 1 << 16


def fingerprint_bytes(data: bytes) -> str:
    digest = hashes.Hash(hashes.SHA256())
    digest.update(data)
    return digest.finalize().hex()


def fingerprint_dict(data) -> str:
    """SHA-256 of the canonical JSON form"""
    return fingerprint_bytes(json.dumps(data, sort_keys=True).encode("utf-8"))


def fingerprint_file(path) -> str:
    digest = hashes.Hash(hashes.SHA256())
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(CHUNK_SIZE), b""):
            digest.update(chunk)
    return digest.finalize().hex()


class Manifest:
    """Fingerprints of a run's inputs and written files"""

    FILENAME = "manifest.json"

    def __init__(self, config_fingerprint=None, scenario=None, years=None):
        self.config_fingerprint = config_fingerprint
        self.scenario = scenario
        self.years = list(years or [])
        self.files = {}

    def add(self, path, out_dir=None):
        name = os.path.relpath(path, out_dir) if out_dir else os.path.basename(path)
        name = name.replace(os.sep, "/")
        self.files[name] = fingerprint_file(path)
        return self.files[name]

    def to_dict(self):
        return {
            "config_sha256": self.config_fingerprint,
            "scenario": self.scenario,
            "years": self.years,
            "files": dict(sorted(self.files.items())),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=4, sort_keys=True)

    def write(self, out_dir):
        path = os.path.join(out_dir, self.FILENAME)
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json())
            f.write("\n")
        logger.info("Manifest with %d files written to %s", len(self.files), path)
        return path

    @staticmethod
    def from_dict(data):
        manifest = Manifest(data.get("config_sha256"), data.get("scenario"), data.get("years"))
        manifest.files = dict(data.get("files", {}))
        return manifest

    def verify(self, out_dir):
        """List of files whose current fingerprint no longer matches"""
        changed = []
        for name, expected in sorted(self.files.items()):
            path = os.path.join(out_dir, name)
            if not os.path.exists(path) or fingerprint_file(path) != expected:
                changed.append(name)
        return changed
