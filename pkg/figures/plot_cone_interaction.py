#!/usr/bin/env python3
"""Render the three-wave interaction from a cone mesh dump.

Blue: the three spherical wave fronts (time slices of the light cones).
Red: the front emitted by the moving intersection.  Black: the filament
traced by the intersection points and the three cone apexes.

Usage: plot_cone_interaction.py --mesh cone-geometry_<hash>.mesh.json --out fig.png
"""

import argparse
import sys

import numpy as np
from mpl_toolkits.mplot3d.art3d import Poly3DCollection

from common import FigureInputError, fail, load_json, plt, save


def clipped(triangles, clip_radius):
    """Keep triangles whose centroid is within clip_radius of the x3 axis."""
    if clip_radius is None:
        return triangles
    kept = []
    for tri in triangles:
        c = np.mean(tri, axis=0)
        if np.hypot(c[0], c[1]) <= clip_radius:
            kept.append(tri)
    return kept


def render(mesh: dict, out_path, clip_radius=None) -> None:
    snaps = mesh["snapshots"]
    fig = plt.figure(figsize=(5.2 * len(snaps), 5.2))
    for k, snap in enumerate(snaps):
        ax = fig.add_subplot(1, len(snaps), k + 1, projection="3d")
        for cone in snap["cones"]:
            tris = clipped(cone["triangles"], clip_radius)
            if tris:
                ax.add_collection3d(
                    Poly3DCollection(tris, facecolor="tab:blue", alpha=0.10, edgecolor="none")
                )
        front = snap.get("front", {}).get("triangles", [])
        if front:
            ax.add_collection3d(
                Poly3DCollection(front, facecolor="tab:red", alpha=0.45, edgecolor="none")
            )
        fil = np.array(mesh["filament"])
        ax.plot(fil[:, 1], fil[:, 2], fil[:, 3], color="black", lw=1.2)
        apex = np.array(mesh["apexes"])
        ax.scatter(apex[:, 1], apex[:, 2], apex[:, 3], color="black", s=12)
        lim = snap["time"] + mesh["s_in"]
        ax.set_xlim(-lim, lim)
        ax.set_ylim(-lim, lim)
        ax.set_zlim(-lim, lim)
        ax.set_title(f"t = {snap['time']:g}")
        ax.set_axis_off()
    fig.suptitle(f"three-cone interaction (s_in = {mesh['s_in']:g}, r = {mesh['r']:g})")
    save(fig, out_path)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--mesh", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--clip", type=float, default=None, help="clip radius around the filament axis")
    args = ap.parse_args(argv)
    try:
        render(load_json(args.mesh), args.out, args.clip)
    except FigureInputError as exc:
        return fail(str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
