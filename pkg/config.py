"""Configuration for the GHSED searchable-encryption service."""

import os

# Server
DATA_DIR = os.environ.get("GHSED_DATA_DIR", "data")
LISTEN = os.environ.get("GHSED_LISTEN", "127.0.0.1:7341")
OWNER_KEY_DIR = os.environ.get("GHSED_OWNER_KEY_DIR", "")
SNAPSHOT_NAME = "ght.snap"

# Owner keys
KEY_DIR = os.environ.get("GHSED_KEY_DIR", "keys")
KEY_BITS = int(os.environ.get("GHSED_KEY_BITS", "2048"))
MIN_KEY_BITS = 1024
EW_MODE = os.environ.get("GHSED_EW_MODE", "public")  # public | private

# Index
DIGEST_ALGORITHM = "sha256"
INDEX_BITS = int(os.environ.get("GHSED_INDEX_BITS", "64"))  # 16 = collision test mode
MAX_KEYWORD_LENGTH = 64

# Wire
MAX_FRAME_BYTES = int(os.environ.get("GHSED_MAX_FRAME_BYTES", str(64 * 1024 * 1024)))
SOCKET_TIMEOUT = float(os.environ.get("GHSED_SOCKET_TIMEOUT", "30"))

# Logging
LOG_LEVEL = os.environ.get("GHSED_LOG_LEVEL", "INFO")

# Benchmarks
BENCH_WARMUP = int(os.environ.get("GHSED_BENCH_WARMUP", "3"))
BENCH_REPEAT = int(os.environ.get("GHSED_BENCH_REPEAT", "25"))
BENCH_SIZES = [100, 1_000, 10_000, 100_000]
