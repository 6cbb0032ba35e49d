"""Streamlit owner console for GHSED."""
from dotenv import load_dotenv
load_dotenv()


import sys
from pathlib import Path

import pandas as pd
import streamlit as st
import yaml

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent))

from config import EW_MODE, INDEX_BITS, KEY_DIR, LISTEN, KEY_BITS
from ghsed.bench import default_specs, EXPERIMENTS
from ghsed.client_indexer import package_document, serialize_ht
from ghsed.errors import GhsedError
from ghsed.owner_crypto import keygen, load_keys, save_keys
from ghsed.protocol import GhsedClient, client_search, parse_address
from models import EwMode


# ---------------------------------------------------------------------------
# Page config
# ---------------------------------------------------------------------------
st.set_page_config(
    page_title="GHSED Owner Console",
    page_icon="🔐",
    layout="wide",
)

st.title("🔐 GHSED Owner Console")
st.caption("Store encrypted documents on an untrusted server and search them by keyword without revealing the keyword.")

# ---------------------------------------------------------------------------
# Session state initialization
# ---------------------------------------------------------------------------
defaults = {
    "keys": None,            # OwnerKeyPair
    "stored": [],            # [(file name, DocId, record count)]
    "search_hits": None,     # [(DocId, plaintext | None)]
    "bench_report": None,    # BenchReport
}
for k, v in defaults.items():
    if k not in st.session_state:
        st.session_state[k] = list(v) if isinstance(v, list) else v


def _run(action, *args, **kwargs) -> dict:
    """Call a library function and return a success/error summary for the UI."""
    try:
        return {"success": True, "result": action(*args, **kwargs), "error": None}
    except GhsedError as e:
        return {"success": False, "result": None, "error": f"{type(e).__name__}: {e}"}


# ---------------------------------------------------------------------------
# Sidebar: settings
# ---------------------------------------------------------------------------
with st.sidebar:
    st.header("⚙️ Settings")

    server = st.text_input("Server (host:port)", value=LISTEN)
    key_dir = st.text_input("Key directory", value=KEY_DIR)
    mode = EwMode(st.radio("Keyword exponent", [m.value for m in EwMode],
                           index=[m.value for m in EwMode].index(EW_MODE), horizontal=True,
                           help="public = as published; private = only the owner can form trapdoors"))
    index_bits = st.number_input("Index bits", min_value=1, max_value=64, value=INDEX_BITS)

    col_load, col_new = st.columns(2)
    with col_load:
        if st.button("📂 Load keys", use_container_width=True):
            res = _run(load_keys, key_dir)
            if res["success"]:
                st.session_state.keys = res["result"]
            else:
                st.error(res["error"])
    with col_new:
        if st.button("🔑 New keys", use_container_width=True):
            keys = keygen(KEY_BITS)
            save_keys(keys, key_dir)
            st.session_state.keys = keys

    keys = st.session_state.keys
    if keys:
        st.success(f"Key {keys.key_id} ({keys.bits} bits)")
    else:
        st.info("Load or generate the owner keys to begin.")

    if st.button("🔄 Reset", use_container_width=True):
        for k, v in defaults.items():
            st.session_state[k] = list(v) if isinstance(v, list) else v
        st.rerun()


tab_store, tab_search, tab_bench = st.tabs(["📥 Store", "🔎 Search", "📈 Benchmarks"])

# =====================================================================
# Store
# =====================================================================
with tab_store:
    st.header("Store Documents", divider="blue")
    uploads = st.file_uploader("Documents to encrypt and upload", accept_multiple_files=True)

    if uploads and keys:
        for uf in uploads:
            with st.expander(f"👀 Heuristic table: {uf.name}"):
                package = package_document(uf.getvalue(), keys, mode, int(index_bits))
                st.code(serialize_ht(package.table).decode("utf-8")[:5000], language="text")

        if st.button("🚀 Upload", type="primary", use_container_width=True):
            with st.spinner("Encrypting and uploading..."):
                try:
                    with GhsedClient(parse_address(server)) as client:
                        for uf in uploads:
                            package = package_document(uf.getvalue(), keys, mode, int(index_bits))
                            doc_id = client.store_package(package)
                            st.session_state.stored.append((uf.name, doc_id, len(package.table.records)))
                except GhsedError as e:
                    st.error(f"{type(e).__name__}: {e}")

    if st.session_state.stored:
        st.dataframe(
            pd.DataFrame(st.session_state.stored, columns=["file", "doc_id", "records"]),
            use_container_width=True,
        )

# =====================================================================
# Search
# =====================================================================
with tab_search:
    st.header("Search by Keyword", divider="green")
    word = st.text_input("Keyword", placeholder="urgent")
    ids_only = st.checkbox("DocIds only", help="Skip downloading ciphertexts")

    if st.button("🔎 Search", disabled=not (word.strip() and keys), type="primary"):
        with st.spinner("Sending signed trapdoor..."):
            res = _run(client_search, word, keys, parse_address(server), mode,
                       int(index_bits), ids_only=ids_only)
        if res["success"]:
            st.session_state.search_hits = res["result"]
        else:
            st.error(res["error"])

    hits = st.session_state.search_hits
    if hits is not None:
        st.caption(f"{len(hits)} matching documents")
        for doc_id, plaintext in hits:
            if plaintext is None:
                st.markdown(f"- Document **{doc_id}**")
                continue
            with st.expander(f"📄 Document {doc_id} ({len(plaintext)} bytes)"):
                st.text(plaintext.decode("utf-8", errors="replace")[:5000])
                st.download_button("⬇️ Download", data=plaintext, file_name=f"doc_{doc_id}",
                                   key=f"dl_{doc_id}")

# =====================================================================
# Benchmarks
# =====================================================================
with tab_bench:
    st.header("Embed and Search Scaling", divider="violet")
    col1, col2, col3 = st.columns(3)
    with col1:
        experiment = st.selectbox("Experiment", sorted(EXPERIMENTS))
    with col2:
        sizes_text = st.text_input("Record counts", value="100,1000,10000")
    with col3:
        seed = st.number_input("Seed", value=0, step=1)

    if st.button("▶️ Run", disabled=not keys, use_container_width=True):
        sizes = [int(s) for s in sizes_text.split(",") if s.strip()]
        specs = default_specs("embed" if experiment == "embed" else "search", sizes, int(seed))
        with st.spinner(f"Running {experiment} experiment..."):
            st.session_state.bench_report = EXPERIMENTS[experiment](specs, keys, mode)

    report = st.session_state.bench_report
    if report is not None:
        df = report.to_frame()
        st.dataframe(df.dropna(axis=1, how="all"), use_container_width=True)
        metric = "embed_ms" if report.experiment == "embed" else "search_median_us"
        if report.experiment != "collisions":
            st.line_chart(df.set_index("record_count")[[metric, "chain_probes"]])
        st.download_button("⬇️ CSV", data=df.to_csv(index=False), file_name=f"{report.experiment}.csv")
        with st.expander("📋 Report metadata"):
            st.code(yaml.dump({"experiment": report.experiment, "seed": report.seed,
                               "rows": len(report.rows)}, sort_keys=False), language="yaml")
