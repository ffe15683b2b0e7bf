"""Push a camera stream through a narrow link and pair images with metadata."""

from rgbdnav.streamsync import ChannelSpec, delivered_rate, desync_ratio, make_stream, synchronize, transmit

horizon = 600.0
link = ChannelSpec(bandwidth=1.0, queue_policy="keep-latest")  # Mb/s
images = transmit(make_stream(60.0, 1.1, horizon, "image"), link, horizon)  # 60 Hz, 1.1 Mb frames
meta = transmit(make_stream(60.0, 0.001, horizon, "metadata"), link, horizon)

print(f"images delivered: {len(images)} at {delivered_rate([d.arrival for d in images], horizon):.4f} Hz")
print(f"metadata delivered: {len(meta)}, metadata per image {desync_ratio(meta, images):.1f}")

pairs = synchronize(meta, images)
print(f"synchronized pairs: {len(pairs)}")
first = pairs[0]
print(f"first pair: image captured {first.image.stamp:.4f} s, emitted {first.emitted:.4f} s, stamped {first.stamp:.4f} s")
print(f"            paired with metadata captured {first.metadata.stamp:.4f} s")
# Metadata is small and arrives almost at once, so by the time a frame gets
# through the link the newest metadata is about one frame-transfer newer.
