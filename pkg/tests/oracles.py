"""Independent reference implementations used to check the production code.

These are written for clarity, not speed, and share no code with the
package beyond the scalar distance function they are meant to call.
"""

from fractions import Fraction

import numpy as np
from scipy.spatial.transform import Rotation

from mvrestore.geometry import Pose, pose_distance


def naive_threadpose(pose_set, init=0):
    """Literal double-linked-list version of the greedy ordering.

    Edges are stored in a dict of neighbour sets and the final order is
    recovered by walking from the head.
    """
    poses = list(pose_set.poses)
    k = len(poses)
    edges = {i: set() for i in range(k)}
    in_list = {init}
    head = tail = init
    while len(in_list) < k:
        best, best_d = None, None
        for c in range(k):
            if c in in_list:
                continue
            d_head = pose_distance(poses[c], poses[head], pose_set)
            d_tail = pose_distance(poses[c], poses[tail], pose_set)
            d = min(d_head, d_tail)
            if best is None or d < best_d:
                best, best_d = c, d
        d_head = pose_distance(poses[best], poses[head], pose_set)
        d_tail = pose_distance(poses[best], poses[tail], pose_set)
        if d_head <= d_tail:
            edges[head].add(best)
            edges[best].add(head)
            head = best
        else:
            edges[tail].add(best)
            edges[best].add(tail)
            tail = best
        in_list.add(best)
    order = [head]
    prev = None
    while len(order) < k:
        cur = order[-1]
        nxt = [n for n in edges[cur] if n != prev]
        prev = cur
        order.append(nxt[0])
    return order


def fraction_apportion(d, n_images, f):
    """Largest-remainder-by-distance allocation in exact rational arithmetic."""
    m = f - n_images
    gaps = n_images - 1
    dq = [Fraction(x) for x in d]
    total = sum(dq)
    if total == 0:
        out = [0] * gaps
        for j in range(m):
            out[j % gaps] += 1
        return out
    out = [int((x * m) // total) for x in dq]
    r = m - sum(out)
    order = sorted(range(gaps), key=lambda i: (-dq[i], i))
    for i in order[:r]:
        out[i] += 1
    return out


def simulate_schedule(k, n):
    """Trace the batch loop on integer labels.

    Returns a list of batches; each batch lists trajectory positions. The
    label carried into the next batch is the last one of the previous batch.
    """
    todo = list(range(k))
    batches = []
    count = k
    while count > 1:
        batch = todo[:n]
        batches.append(batch)
        todo = todo[len(batch):]
        count = max(count - len(batch), 0)
        todo = [batch[-1]] + todo
        count += 1
    return batches


def random_rotation(rng):
    return Rotation.random(random_state=rng).as_matrix()


def random_poses(rng, k, spread=5.0):
    return [Pose(random_rotation(rng), rng.normal(scale=spread, size=3), i) for i in range(k)]


def line_poses(xs):
    return [Pose(np.eye(3), np.array([float(x), 0.0, 0.0]), i) for i, x in enumerate(xs)]


# --------------------------------------------------------------------------
# manifest fuzzing
# --------------------------------------------------------------------------

def _json_mutations(doc, rng):
    """Yield a few single-edit variants of a manifest document."""
    import copy

    d = copy.deepcopy(doc)
    slots = d["slots"]
    i = int(rng.integers(len(slots)))
    choice = int(rng.integers(22))
    junk = [None, True, -1, 0, 1.5, "x", [], {}, 10 ** 6, "frames/frame_000.png"]
    if choice == 0:
        d.pop(rng.choice(sorted(d)))
    elif choice == 1:
        d["extra"] = 1
    elif choice == 2:
        d["version"] = junk[int(rng.integers(len(junk)))]
    elif choice == 3:
        d["f"] = d["f"] + int(rng.choice([-1, 1]))
    elif choice == 4:
        d["n"] = d["n"] + int(rng.choice([-1, 1]))
    elif choice == 5:
        d["style_slot"] = int(rng.integers(-2, len(slots) + 2))
    elif choice == 6:
        d["resolution"] = junk[int(rng.integers(len(junk)))]
    elif choice == 7:
        d["resolution"] = [d["resolution"][0] + 1, d["resolution"][1]]
    elif choice == 8:
        slots[i]["kind"] = "zero" if slots[i]["kind"] == "image" else "image"
    elif choice == 9:
        slots[i].pop(rng.choice(sorted(slots[i])))
    elif choice == 10:
        slots[i]["source_index"] = junk[int(rng.integers(len(junk)))]
    elif choice == 11:
        key = rng.choice(["frame_path", "inpaint_mask_path", "style_mask_path"])
        slots[i][key] = junk[int(rng.integers(len(junk)))]
    elif choice == 12:
        slots[i]["frame_path"] = "../" + slots[i]["frame_path"]
    elif choice == 13:
        j = int(rng.integers(len(slots)))
        slots[i]["inpaint_mask_path"], slots[j]["inpaint_mask_path"] = \
            slots[j]["inpaint_mask_path"], slots[i]["inpaint_mask_path"]
    elif choice == 14:
        j = int(rng.integers(len(slots)))
        slots[i]["style_mask_path"], slots[j]["style_mask_path"] = \
            slots[j]["style_mask_path"], slots[i]["style_mask_path"]
    elif choice == 15:
        slots.pop(i)
    elif choice == 16:
        slots.append(dict(slots[i]))
    elif choice == 17:
        slots[i]["extra"] = 0
    elif choice == 18:
        d["slots"] = junk[int(rng.integers(len(junk)))]
    elif choice == 19:
        if slots[i]["kind"] == "image":
            slots[i]["source_index"] = slots[i]["source_index"] + 1     # benign
    elif choice == 20:
        d["f"] = float(d["f"])
    else:
        slots[i] = junk[int(rng.integers(len(junk)))]
    return d


def mutate_manifest_dir(src, dst, rng):
    """Copy a manifest directory and apply one random mutation.

    Mutations touch the JSON text, the JSON structure or the referenced
    files. Returns a short label of what was done.
    """
    import json
    import shutil
    from pathlib import Path

    import numpy as np
    from PIL import Image

    shutil.copytree(src, dst)
    path = Path(dst) / "manifest.json"
    doc = json.loads(path.read_text())
    kind = int(rng.integers(10))
    files = sorted(p for p in Path(dst).rglob("*.png"))
    if kind == 0:
        text = path.read_text()
        cut = int(rng.integers(len(text)))
        path.write_text(text[:cut])
        return "truncate-json"
    if kind == 1:
        text = bytearray(path.read_bytes())
        pos = int(rng.integers(len(text)))
        text[pos] = int(rng.integers(256))
        path.write_bytes(bytes(text))
        return "flip-byte"
    if kind == 2:
        files[int(rng.integers(len(files)))].unlink()
        return "delete-file"
    if kind == 3:
        files[int(rng.integers(len(files)))].write_bytes(b"not a png")
        return "corrupt-file"
    if kind == 4:
        victim = files[int(rng.integers(len(files)))]
        with Image.open(victim) as im:
            arr = np.asarray(im).copy()
        if arr.ndim == 2:
            arr[0, 0] = 128
            Image.fromarray(arr, "L").save(victim)
        else:
            Image.fromarray(arr[..., 0], "L").save(victim)
        return "bad-pixels"
    if kind == 5:
        victim = files[int(rng.integers(len(files)))]
        with Image.open(victim) as im:
            arr = np.asarray(im).copy()
        Image.fromarray(arr[:-1]).save(victim)
        return "resize-file"
    if kind == 6:
        victim = [p for p in files if "inpaint" in str(p) or "style" in str(p)]
        victim = victim[int(rng.integers(len(victim)))]
        with Image.open(victim) as im:
            arr = np.asarray(im).copy()
        Image.fromarray(255 - arr, "L").save(victim)
        return "invert-mask"
    path.write_text(json.dumps(_json_mutations(doc, rng)))
    return "json-edit"
