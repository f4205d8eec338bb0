// Synthetic sensor frames for the developer "frame mode": instead of a
// classified gesture name, the pad sends a raw frame shaped to classify
// back to the chosen gesture, exercising the server-side classifier and
// debounce path. Repeated identical presses debounce to "none" there,
// which is exactly what a held gesture does at sensor rate.

const Z_PICK = Math.sqrt(1 - 0.3 * 0.3 - 0.6 * 0.6);
const Z_FLAT = Math.sqrt(1 - 0.2 * 0.2);

let frameCounter = 0;

export function nextFrameId(): number {
  frameCounter += 1;
  return frameCounter;
}

export function syntheticFrame(gesture: string): Record<string, unknown> {
  const frameId = nextFrameId();
  const base = { frame_id: frameId, t: frameId / 300 };
  switch (gesture) {
    case "Pick":
      return { ...base, hands: [{ hand_type: "Right", pitch_deg: 10, arm_dir: [0.3, -0.6, Z_PICK] }] };
    case "Place":
      return { ...base, hands: [{ hand_type: "Right", pitch_deg: 10, arm_dir: [-0.3, -0.6, Z_PICK] }] };
    case "SwipeRight":
      return { ...base, swipes: [{ dir_x: 0.8, speed: 500 }] };
    case "SwipeLeft":
      return { ...base, swipes: [{ dir_x: -0.8, speed: 500 }] };
    case "LeanBackward":
      return { ...base, hands: [{ hand_type: "Right", pitch_deg: 50, arm_dir: [0, 0.2, Z_FLAT] }] };
    case "LeanForward":
      return { ...base, hands: [{ hand_type: "Right", pitch_deg: 10, arm_dir: [0, 0.2, Z_FLAT] }] };
    case "Tool":
      return { ...base, tool_count: 1 };
    default:
      throw new Error(`unknown gesture: ${gesture}`);
  }
}
