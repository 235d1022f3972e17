# Blob detection on a rendered scene and mapping the boxes onto a rotated,
# letterboxed display.

from skyfeed.colorspace import yuv_to_argb
from skyfeed.frames import Resolution, Rotation
from skyfeed.inference import Calibration, DetectorConfig, calibrate_box, detect
from skyfeed.scene import SceneObject, SyntheticSceneSpec, object_boxes, render_scene

spec = SyntheticSceneSpec(
    Resolution(160, 120), (10, 10, 10),
    (SceneObject((255, 0, 0), 30, 40, 20, 10, 3, 1),      # wide red target
     SceneObject((0, 0, 255), 100, 20, 8, 30, -2, 2),     # tall blue target
     SceneObject((255, 0, 0), 120, 90, 30, 3, 0, 0)),     # red streak, too thin
    frame_count=20)

config = DetectorConfig.parse("""
# label h_lo h_hi s_lo s_hi v_lo v_hi min_area aspect_min aspect_max
red   340  20 0.5 1 0.5 1 30 0.5 4
blue  200 260 0.5 1 0.5 1 30 0.1 1
""")

_, yuv = render_scene(spec, 7)
image = yuv_to_argb(yuv)
print("truth:", object_boxes(spec, 7))
for det in detect(image, config):
    print(f"  {det.label:5s} box={det.box} fill={det.score:.3f}")
    for rot in Rotation:
        cal = Calibration(spec.resolution, Resolution(1280, 800), rot)
        print(f"      rotation {int(rot):3d} -> display {calibrate_box(det.box, cal)}")
