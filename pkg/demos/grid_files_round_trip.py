"""Tour the .vxg and .sil container formats byte by byte.

Both are little-endian with an 8-byte magic, dimensions, a payload-kind flag
byte, and a raw payload (float32 values, or LSB-first packed bits). The
writers quantize doubles to float32, so a float32-valued grid round-trips
losslessly; bit payloads always do.
"""

import numpy as np

from voxsel.grid import OccupancySet, VoxelGrid
from voxsel.io import FormatError, parse_sil, parse_vxg, sil_bytes, vxg_bytes
from voxsel.synthesis import SilhouetteImage


def main():
    vals = np.zeros((2, 2, 2), dtype=np.float64)
    vals[0, 0, 0] = 0.5
    vals[1, 1, 1] = 1.0
    data = vxg_bytes(VoxelGrid(vals))
    print(f".vxg for a 2x2x2 grid is {len(data)} bytes:")
    print(f"  magic   {data[:8]!r}")
    print(f"  dims    {np.frombuffer(data[8:20], dtype='<u4').tolist()}")
    print(f"  flags   {data[20]} (0 = float32 values, 1 = packed bits)")
    print(f"  payload {len(data) - 21} bytes, x varies fastest")

    bits = OccupancySet(vals > 0.25)
    packed = vxg_bytes(bits)
    print(f"\nsame occupancy as bits: {len(packed)} bytes, payload {packed[21:]!r}")
    print("round-trips losslessly:", bool(np.array_equal(parse_vxg(packed).bits, bits.bits)))

    sil = SilhouetteImage(np.eye(3, dtype=bool))
    sdata = sil_bytes(sil)
    print(f"\n.sil for a 3x3 image is {len(sdata)} bytes, magic {sdata[:8]!r}")
    print("round-trips losslessly:", bool(np.array_equal(parse_sil(sdata).pixels, sil.pixels)))

    print("\nmalformed input is rejected with the failing offset:")
    for label, corrupt in [
        ("bad magic ", b"XXGRID01" + data[8:]),
        ("bad flags ", data[:20] + bytes([9]) + data[21:]),
        ("truncated ", data[: len(data) // 2]),
    ]:
        try:
            parse_vxg(corrupt)
        except FormatError as exc:
            print(f"  {label}: {exc}")


if __name__ == "__main__":
    main()
