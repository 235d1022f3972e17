# Encoding a short synthetic clip with the keyframe/delta codec, then turning
# one decoded frame into ARGB the same way the inference worker does.

from skyfeed.codec import Decoder, Encoder
from skyfeed.colorspace import planar_to_semiplanar, yuv_to_argb
from skyfeed.frames import Resolution
from skyfeed.scene import SceneObject, SyntheticSceneSpec, object_boxes, scene_frames

spec = SyntheticSceneSpec(Resolution(320, 240), (20, 60, 20),
                          (SceneObject((255, 0, 0), 40, 30, 48, 24, 4, 3),), frame_count=60)
frames = list(scene_frames(spec))

# A keyframe every 30 frames; the rest are deltas against the previous frame.
enc, dec = Encoder(keyframe_interval=30), Decoder()
raw = sum(len(f.to_bytes()) for f in frames)
coded = 0
for f in frames:
    e = enc.encode(f)
    coded += len(e.payload)
    assert dec.decode(e).to_bytes() == f.to_bytes()
print(f"{len(frames)} frames: {raw} raw bytes -> {coded} coded bytes ({raw / coded:.1f}x)")

# I420 -> NV21 -> ARGB8888, as the listener does before handing off to inference.
nv21 = planar_to_semiplanar(frames[10])
argb = yuv_to_argb(nv21)
x, y, w, h = object_boxes(spec, 10)[0]
print("pixel at the rectangle centre:", argb.rgb()[y + h // 2, x + w // 2].tolist())
print("background pixel:", argb.rgb()[200, 300].tolist())
