import { describe, expect, it } from "vitest";

import { syntheticFrame } from "../src/frames.js";

const GESTURES = ["Pick", "Place", "SwipeRight", "SwipeLeft",
                  "LeanBackward", "LeanForward", "Tool"];

describe("synthetic frames", () => {
  it("covers all seven pad gestures", () => {
    for (const gesture of GESTURES) {
      expect(() => syntheticFrame(gesture)).not.toThrow();
    }
    expect(() => syntheticFrame("Wave")).toThrow();
  });

  it("frame ids strictly increase so the server stream stays ordered", () => {
    const a = syntheticFrame("Pick") as { frame_id: number };
    const b = syntheticFrame("Pick") as { frame_id: number };
    expect(b.frame_id).toBeGreaterThan(a.frame_id);
  });

  it("hand directions are unit vectors", () => {
    for (const gesture of ["Pick", "Place", "LeanBackward", "LeanForward"]) {
      const frame = syntheticFrame(gesture) as {
        hands: { arm_dir: number[] }[];
      };
      const [x, y, z] = frame.hands[0].arm_dir;
      expect(Math.abs(Math.sqrt(x * x + y * y + z * z) - 1)).toBeLessThan(1e-9);
    }
  });

  it("pick and place sit inside the threshold region", () => {
    const pick = syntheticFrame("Pick") as { hands: { arm_dir: number[] }[] };
    expect(pick.hands[0].arm_dir[0]).toBeGreaterThan(0.2);
    expect(pick.hands[0].arm_dir[1]).toBeLessThanOrEqual(-0.5);
    const place = syntheticFrame("Place") as { hands: { arm_dir: number[] }[] };
    expect(place.hands[0].arm_dir[0]).toBeLessThan(-0.2);
  });

  it("swipes split on direction sign", () => {
    const right = syntheticFrame("SwipeRight") as { swipes: { dir_x: number }[] };
    const left = syntheticFrame("SwipeLeft") as { swipes: { dir_x: number }[] };
    expect(right.swipes[0].dir_x).toBeGreaterThan(0);
    expect(left.swipes[0].dir_x).toBeLessThan(0);
  });
});
