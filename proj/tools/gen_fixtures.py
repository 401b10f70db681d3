#!/usr/bin/env python3
"""Regenerates the meshes in fixtures/. Requires numpy and triangle."""

import argparse
import math
import pathlib

import numpy as np
import triangle


def write_obj(path, verts, tris):
    with open(path, "w") as f:
        for v in verts:
            z = v[2] if len(v) > 2 else 0.0
            f.write(f"v {v[0]:.17g} {v[1]:.17g} {z:.17g}\n")
        for t in tris:
            f.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")


def write_off(path, verts, tris):
    with open(path, "w") as f:
        f.write(f"OFF\n{len(verts)} {len(tris)} 0\n")
        for v in verts:
            f.write(f"{v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for t in tris:
            f.write(f"3 {t[0]} {t[1]} {t[2]}\n")


def loop_segments(start, count):
    return [[start + i, start + (i + 1) % count] for i in range(count)]


def refine_polyline(points, step):
    """Closed polygon with each side split into pieces no longer than step."""
    out = []
    n = len(points)
    for i in range(n):
        a = np.asarray(points[i], float)
        b = np.asarray(points[(i + 1) % n], float)
        k = max(1, int(math.ceil(np.linalg.norm(b - a) / step - 1e-9)))
        for j in range(k):
            out.append(a + (b - a) * j / k)
    return out


def mesh_polygon(outer, holes=(), area=0.01, step=None):
    """Quality triangulation of a polygon with polygonal holes."""
    step = step or math.sqrt(2.0 * area)
    verts, segs, hole_pts = [], [], []
    for poly in [outer, *holes]:
        pts = refine_polyline(poly, step)
        segs += loop_segments(len(verts), len(pts))
        verts += pts
    for h in holes:
        hole_pts.append(np.mean(np.asarray(h, float), axis=0))
    data = {"vertices": np.array(verts), "segments": np.array(segs)}
    if hole_pts:
        data["holes"] = np.array(hole_pts)
    out = triangle.triangulate(data, f"pq30a{area:.6g}")
    return out["vertices"], out["triangles"]


def circle(cx, cy, r, n):
    return [(cx + r * math.cos(2 * math.pi * k / n), cy + r * math.sin(2 * math.pi * k / n)) for k in range(n)]


def grid_square(n):
    verts = [(i / n, j / n) for j in range(n + 1) for i in range(n + 1)]
    tris = []
    for j in range(n):
        for i in range(n):
            a = j * (n + 1) + i
            b, c, d = a + 1, a + n + 2, a + n + 1
            if (i + j) % 2 == 0:
                tris += [(a, b, c), (a, c, d)]
            else:
                tris += [(a, b, d), (b, c, d)]
    return verts, tris


def subdivided_triangle(p0, p1, p2, n):
    """Regular n^2 subdivision of one triangle; returns (verts, tris)."""
    p0, p1, p2 = map(np.asarray, (p0, p1, p2))
    index = {}
    verts = []
    for i in range(n + 1):
        for j in range(n + 1 - i):
            index[(i, j)] = len(verts)
            verts.append(p0 + (p1 - p0) * i / n + (p2 - p0) * j / n)
    tris = []
    for i in range(n):
        for j in range(n - i):
            tris.append((index[(i, j)], index[(i + 1, j)], index[(i, j + 1)]))
            if i + j + 1 < n:
                tris.append((index[(i + 1, j)], index[(i + 1, j + 1)], index[(i, j + 1)]))
    return verts, tris


def merged_fan(center, ring, n):
    """Fan of subdivided triangles around a centre, with shared nodes merged."""
    verts, tris, lookup = [], [], {}
    for k in range(len(ring)):
        v, t = subdivided_triangle(center, ring[k], ring[(k + 1) % len(ring)], n)
        remap = []
        for p in v:
            key = (round(p[0], 9), round(p[1], 9))
            if key not in lookup:
                lookup[key] = len(verts)
                verts.append(p)
            remap.append(lookup[key])
        tris += [(remap[a], remap[b], remap[c]) for a, b, c in t]
    return np.array(verts), tris


def hemisphere(area):
    v, t = mesh_polygon(circle(0, 0, 1, 96), area=area)
    out = []
    for x, y in v:
        rho = math.hypot(x, y)
        polar = rho * math.pi / 2
        phi = math.atan2(y, x)
        out.append((math.sin(polar) * math.cos(phi), math.sin(polar) * math.sin(phi), math.cos(polar)))
    return out, t


def icosahedron():
    g = (1 + math.sqrt(5)) / 2
    v = [(-1, g, 0), (1, g, 0), (-1, -g, 0), (1, -g, 0), (0, -1, g), (0, 1, g),
         (0, -1, -g), (0, 1, -g), (g, 0, -1), (g, 0, 1), (-g, 0, -1), (-g, 0, 1)]
    f = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4), (11, 10, 2),
         (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9), (4, 9, 5),
         (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    return v, f


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "fixtures"))
    out = pathlib.Path(ap.parse_args().out)
    out.mkdir(parents=True, exist_ok=True)

    write_obj(out / "square.obj", *grid_square(16))
    s3 = math.sqrt(3) / 2
    v, t = subdivided_triangle((0, 0), (1, 0), (0.5, s3), 21)
    write_obj(out / "triangle.obj", v, t)
    write_obj(out / "pentagon.obj", *mesh_polygon(circle(0, 0, 1, 5), area=0.004))
    write_obj(out / "lshape.obj", *mesh_polygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)], area=0.006))
    write_obj(out / "annulus.obj",
              *mesh_polygon([(0, 0), (3, 0), (3, 3), (0, 3)], [[(1, 1), (1, 2), (2, 2), (2, 1)]], area=0.012))
    write_obj(out / "hemisphere.obj", *hemisphere(0.004))
    hexagon = [(math.cos(k * math.pi / 3), math.sin(k * math.pi / 3)) for k in range(6)]
    v, t = merged_fan((0.0, 0.0), hexagon, 10)
    # Radial map of the hexagon onto the unit disk keeps the D6 symmetry.
    apothem = math.cos(math.pi / 6)
    disk = []
    for x, y in v:
        offset = math.atan2(y, x) % (math.pi / 3) - math.pi / 6
        scale = math.cos(offset) / apothem
        disk.append((x * scale, y * scale))
    write_obj(out / "disk.obj", disk, t)
    write_off(out / "icosahedron.off", *icosahedron())

    plate = [(0, 0), (4, 0), (4, 2), (2.6, 2), (2.6, 1.6), (2.2, 1.6), (2.2, 2), (0, 2)]
    holes = [[(0.7, 0.7), (0.7, 1.3), (1.3, 1.3), (1.3, 0.7)], circle(3.2, 0.8, 0.3, 40)[::-1]]
    write_obj(out / "plate.obj", *mesh_polygon(plate, holes, area=0.0009, step=0.025))

    notch = [(0, 0), (1.0, 0), (1.0, 0.3), (1.3, 0.3), (1.3, 0), (3, 0), (3, 1), (1.42, 1), (1.42, 0.7),
             (1.12, 0.7), (1.12, 1), (0, 1)]
    write_obj(out / "notch.obj", *mesh_polygon(notch, area=0.0015))


if __name__ == "__main__":
    main()
