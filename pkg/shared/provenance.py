"""
Provenance documents for simulation outputs.

Every command writes a JSON document next to its CSV:

  {"kind", "code_version", "config", "result", "digest"[, "signature", "public_key"]}

``digest`` is the SHA-256 of the canonical JSON (sorted keys) of the
first four entries.  When a signing key directory is configured the
digest is also signed with Ed25519, so a document can be checked for
tampering and traced to the machine that produced it.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric.ed25519 import Ed25519PrivateKey, Ed25519PublicKey

from shared import __version__
from shared.errors import ConfigError
from shared.schemas import RunConfig

logger = logging.getLogger(__name__)

SIGNED_FIELDS = ("kind", "code_version", "config", "result")
_PRIVATE_FILE = "private.hex"
_PUBLIC_FILE = "public.hex"


# ---------------------------------------------------------------------------
# Digests
# ---------------------------------------------------------------------------

def canonical_bytes(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, default=str).encode()


def document_digest(payload: dict) -> str:
    """Hex SHA-256 over the canonical JSON of ``payload``."""
    h = hashes.Hash(hashes.SHA256())
    h.update(canonical_bytes(payload))
    return h.finalize().hex()


# ---------------------------------------------------------------------------
# Signing keys
# ---------------------------------------------------------------------------

def public_key_hex(key: Ed25519PrivateKey) -> str:
    return key.public_key().public_bytes(serialization.Encoding.Raw, serialization.PublicFormat.Raw).hex()


def load_signing_key(directory: str | Path, create: bool = True) -> Ed25519PrivateKey:
    """Ed25519 key stored in ``directory``; generated on first use when ``create``."""
    directory = Path(directory)
    private_path = directory / _PRIVATE_FILE
    if private_path.exists():
        return Ed25519PrivateKey.from_private_bytes(bytes.fromhex(private_path.read_text().strip()))
    if not create:
        raise ConfigError(f"no signing key in {directory}")

    key = Ed25519PrivateKey.generate()
    directory.mkdir(parents=True, exist_ok=True)
    raw = key.private_bytes(
        serialization.Encoding.Raw,
        serialization.PrivateFormat.Raw,
        serialization.NoEncryption(),
    )
    private_path.write_text(raw.hex())
    (directory / _PUBLIC_FILE).write_text(public_key_hex(key))
    logger.info("Generated document signing key in %s", directory)
    return key


# ---------------------------------------------------------------------------
# Documents
# ---------------------------------------------------------------------------

def build_document(
    kind: str,
    config: RunConfig,
    result: dict[str, Any],
    signing_key: Ed25519PrivateKey | None = None,
) -> dict[str, Any]:
    """Assemble, digest and optionally sign an output document."""
    document: dict[str, Any] = {
        "kind": kind,
        "code_version": __version__,
        "config": config.model_dump(mode="json"),
        "result": result,
    }
    document["digest"] = document_digest({k: document[k] for k in SIGNED_FIELDS})
    if signing_key is not None:
        document["signature"] = signing_key.sign(bytes.fromhex(document["digest"])).hex()
        document["public_key"] = public_key_hex(signing_key)
    return document


def verify_document(document: dict[str, Any]) -> tuple[bool, str]:
    """Check the digest and, if present, the signature; returns (ok, reason)."""
    missing = [k for k in (*SIGNED_FIELDS, "digest") if k not in document]
    if missing:
        return False, f"missing fields {missing}"
    digest = document_digest({k: document[k] for k in SIGNED_FIELDS})
    if digest != document["digest"]:
        return False, "digest mismatch"
    if "signature" not in document:
        return True, "digest ok (unsigned)"
    try:
        public = Ed25519PublicKey.from_public_bytes(bytes.fromhex(document["public_key"]))
        public.verify(bytes.fromhex(document["signature"]), bytes.fromhex(digest))
    except (InvalidSignature, KeyError, ValueError):
        return False, "bad signature"
    return True, "digest and signature ok"


def write_document(path: str | Path, document: dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(document, indent=2, default=str) + "\n")
    logger.info("Wrote %s document to %s", document.get("kind", "?"), path)
    return path


def read_document(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"document not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed document {path}: {exc}") from exc
