# An in-process feed server and a threaded pipeline client over TCP,
# finishing with the details report the headless app writes to stats.json.

import threading

import numpy as np

from skyfeed.colorspace import yuv_to_argb
from skyfeed.frames import Resolution
from skyfeed.inference import ClassifierBackend, fit_classifier
from skyfeed.pipeline import Pipeline, ThreadWorker
from skyfeed.scene import SceneObject, SyntheticSceneSpec, render_scene, scene_frames
from skyfeed.wire import FeedServer, ServerConfig, connect_session, generate_key

rng = np.random.default_rng(0)


def scene(bg, n=1):
    obj = SceneObject(tuple(int(c) for c in rng.integers(0, 256, 3)), 10, 10, 16, 12, 3, 2)
    return SyntheticSceneSpec(Resolution(96, 72), bg, (obj,), frame_count=n)


# a tiny "sky vs ground" classifier trained on rendered stills
train = [(scene((60, 120, 230)), 0) for _ in range(20)] + [(scene((90, 140, 40)), 1) for _ in range(20)]
images = [yuv_to_argb(render_scene(s, 0)[1]) for s, _ in train]
model = fit_classifier(images, [t for _, t in train], ("sky", "ground"), bins=4, input_side=32)

feed = list(scene_frames(scene((60, 120, 230), n=45)))
key = generate_key("DEMO0000000000000001")
server = FeedServer("127.0.0.1:0", lambda: iter(feed), ServerConfig(fps=30), max_sessions=1)
threading.Thread(target=server.serve_forever, daemon=True).start()

worker = ThreadWorker()
pipe = Pipeline(ClassifierBackend(model, k=2), worker=worker, display_res=Resolution(1280, 800))
with connect_session(server.address, key) as conn:
    print(f"connected to {conn.product_name} (firmware {conn.firmware})")
    for enc in conn:
        pipe.on_encoded(enc)
worker.drain()

last = pipe.results[-1]
print("last result:", [(r.label, round(r.score, 3)) for r in last.recognitions])
print(pipe.report().to_json(indent=2))
