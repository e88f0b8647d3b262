"""Slicing a large aerial image into detector-sized tiles.

Plans overlapping 512 px tiles over a 5280 x 2970 frame, remaps a
ground-truth box into the tiles that see it, and maps one back to
verify the round trip.
"""

from uavsearch import BoxLabel, plan_tiles, remap_labels, tile_name

plan = plan_tiles(5280, 2970, 512, 512, overlap=100)
print(f"{plan.n_cols} columns x {plan.n_rows} rows = {len(plan)} tiles")

xs = sorted({t.x0 for t in plan.tiles})
print("column offsets:", xs)
overlaps = [a + 512 - b for a, b in zip(xs, xs[1:])]
print("column overlaps:", overlaps, "(all >=", min(overlaps), "px)")

# a 40 x 60 px box near the image center, in normalized coordinates
box = BoxLabel(category=0, x_center=2600 / 5280, y_center=1500 / 2970,
               width=40 / 5280, height=60 / 2970)
seen_in = []
for tile in plan.tiles:
    kept = remap_labels([box], tile, 5280, 2970, min_visible=0.3)
    if kept:
        seen_in.append((tile, kept[0]))
print(f"\nthe box is visible in {len(seen_in)} tiles:")
for tile, local in seen_in:
    print(f"  {tile_name('frame', tile)}: center "
          f"({local.x_center:.3f}, {local.y_center:.3f}) in tile coordinates")

tile, local = seen_in[0]
back_x = tile.x0 + local.x_center * tile.width
back_y = tile.y0 + local.y_center * tile.height
print(f"\nround trip through {tile_name('frame', tile)}: "
      f"center ({back_x:.1f}, {back_y:.1f}) px vs original (2600, 1500)")
