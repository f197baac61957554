"""The embedding store and weighted two-view retrieval.

Run: python demos/05_embedding_retrieval.py   (writes demo.radstore)
"""

from ragdrive import (
    EmbeddingRecord,
    EmbeddingStore,
    MockEmbedder,
    RetrievalConfig,
    top_k,
)

# The mock embedder maps image bytes to a deterministic unit vector, so the
# whole flow runs offline. A real deployment points the gateway at an
# embedding service instead.
embedder = MockEmbedder(dim_front=64, dim_bev=64, seed=0)

store = EmbeddingStore()
for i in range(200):
    front = f"front view of scene {i}".encode()
    bev = f"bev view of scene {i}".encode()
    store.put(EmbeddingRecord(
        scene_id=f"scene-{i:03d}",
        v_fv=embedder.embed(front, "front_view"),
        v_bev=embedder.embed(bev, "bev"),
    ))

store.persist("demo.radstore")
reopened = EmbeddingStore.open("demo.radstore")
print(f"store round-trip: {reopened.count} records, "
      f"dims ({reopened.d_fv}, {reopened.d_bev})")

# Querying with a stored scene's own images retrieves that scene exactly.
q_fv = embedder.embed(b"front view of scene 42", "front_view")
q_bev = embedder.embed(b"bev view of scene 42", "bev")
hit = top_k(q_fv, q_bev, reopened)[0]
print(f"self query -> {hit.scene_id} overall {hit.sim_overall:.6f}")

# omega slides the preference between the two views.
q_fv = embedder.embed(b"front view of scene 42", "front_view")
q_bev = embedder.embed(b"bev view of scene 7", "bev")  # views disagree
for omega in (0.0, 0.25, 0.5, 0.75, 1.0):
    hits = top_k(q_fv, q_bev, reopened, RetrievalConfig(omega=omega, k=1))
    print(f"omega={omega:4.2f} -> {hits[0].scene_id} "
          f"(fv {hits[0].sim_fv:+.3f}, bev {hits[0].sim_bev:+.3f})")
