// Pure placement math: ray/mesh intersection and projector construction.
// No DOM or three.js here so everything is unit-testable in node.

export type Vec3 = [number, number, number];
export type Quat = [number, number, number, number]; // x, y, z, w

export interface MeshData {
  positions: Float32Array; // per corner, 3 floats
  normals: Float32Array;
  uvs: Float32Array; // 2 floats
  triangleCount: number;
}

export interface SurfaceHit {
  point: Vec3;
  normal: Vec3; // barycentric-interpolated vertex normal, unit length
  distance: number;
  triangle: number;
}

export interface PlacementPreview {
  point: Vec3;
  normal: Vec3;
  position: Vec3; // projector center: point + normal * depth
  orientation: Quat; // forward (-Z) aligned to -normal
}

export interface BrushParams {
  scaleX: number;
  scaleY: number;
  depth: number;
  rotation: number; // radians about the projector forward axis
  blendMode: "copy" | "alpha_over";
  filter: "nearest" | "bilinear";
  cullCosine: number;
  alphaThreshold: number;
}

export interface StampRequest {
  position: number[];
  orientation: number[];
  scale: number[];
  decal_id: string;
  blend_mode: string;
  filter: string;
  cull_cosine: number;
  alpha_threshold: number;
}

const sub = (a: Vec3, b: Vec3): Vec3 => [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
const cross = (a: Vec3, b: Vec3): Vec3 => [
  a[1] * b[2] - a[2] * b[1],
  a[2] * b[0] - a[0] * b[2],
  a[0] * b[1] - a[1] * b[0],
];
const dot = (a: Vec3, b: Vec3) => a[0] * b[0] + a[1] * b[1] + a[2] * b[2];

function normalize(v: Vec3): Vec3 {
  const len = Math.hypot(v[0], v[1], v[2]);
  if (len === 0) return [0, 0, 0];
  return [v[0] / len, v[1] / len, v[2] / len];
}

/** Nearest front-or-back triangle hit along the ray (Moller-Trumbore). */
export function intersectMesh(origin: Vec3, direction: Vec3, mesh: MeshData): SurfaceHit | null {
  let best: SurfaceHit | null = null;
  const p = mesh.positions;
  const n = mesh.normals;
  for (let t = 0; t < mesh.triangleCount; t++) {
    const i = t * 9;
    const a: Vec3 = [p[i], p[i + 1], p[i + 2]];
    const b: Vec3 = [p[i + 3], p[i + 4], p[i + 5]];
    const c: Vec3 = [p[i + 6], p[i + 7], p[i + 8]];
    const e1 = sub(b, a);
    const e2 = sub(c, a);
    const h = cross(direction, e2);
    const det = dot(e1, h);
    if (Math.abs(det) < 1e-12) continue;
    const inv = 1 / det;
    const s = sub(origin, a);
    const u = inv * dot(s, h);
    if (u < 0 || u > 1) continue;
    const q = cross(s, e1);
    const v = inv * dot(direction, q);
    if (v < 0 || u + v > 1) continue;
    const dist = inv * dot(e2, q);
    if (dist <= 1e-9) continue;
    if (best === null || dist < best.distance) {
      const w = 1 - u - v;
      const normal = normalize([
        w * n[i] + u * n[i + 3] + v * n[i + 6],
        w * n[i + 1] + u * n[i + 4] + v * n[i + 7],
        w * n[i + 2] + u * n[i + 5] + v * n[i + 8],
      ]);
      best = {
        point: [
          origin[0] + dist * direction[0],
          origin[1] + dist * direction[1],
          origin[2] + dist * direction[2],
        ],
        normal,
        distance: dist,
        triangle: t,
      };
    }
  }
  return best;
}

/** Quaternion (x,y,z,w) from a right-handed orthonormal basis given as
 * columns right/up/back of the rotation matrix. */
function quatFromBasis(right: Vec3, up: Vec3, back: Vec3): Quat {
  const m00 = right[0], m01 = up[0], m02 = back[0];
  const m10 = right[1], m11 = up[1], m12 = back[1];
  const m20 = right[2], m21 = up[2], m22 = back[2];
  const trace = m00 + m11 + m22;
  let x: number, y: number, z: number, w: number;
  if (trace > 0) {
    const s = 2 * Math.sqrt(trace + 1);
    w = s / 4;
    x = (m21 - m12) / s;
    y = (m02 - m20) / s;
    z = (m10 - m01) / s;
  } else if (m00 > m11 && m00 > m22) {
    const s = 2 * Math.sqrt(1 + m00 - m11 - m22);
    w = (m21 - m12) / s;
    x = s / 4;
    y = (m01 + m10) / s;
    z = (m02 + m20) / s;
  } else if (m11 > m22) {
    const s = 2 * Math.sqrt(1 + m11 - m00 - m22);
    w = (m02 - m20) / s;
    x = (m01 + m10) / s;
    y = s / 4;
    z = (m12 + m21) / s;
  } else {
    const s = 2 * Math.sqrt(1 + m22 - m00 - m11);
    w = (m10 - m01) / s;
    x = (m02 + m20) / s;
    y = (m12 + m21) / s;
    z = s / 4;
  }
  const len = Math.hypot(x, y, z, w);
  return [x / len, y / len, z / len, w / len];
}

const WORLD_UP: Vec3 = [0, 1, 0];
const WORLD_X: Vec3 = [1, 0, 0];

/** Build the preview projector over a surface hit: forward = -normal,
 * center offset along the normal by `depth`, up = world-up projected
 * off forward (world-X when they are parallel). */
export function makePreview(hit: SurfaceHit, depth: number): PlacementPreview {
  const back = hit.normal; // projector back (+Z) points out of the surface
  const forward: Vec3 = [-back[0], -back[1], -back[2]];
  let up = projectOff(WORLD_UP, forward);
  if (Math.hypot(...up) < 1e-6) {
    up = projectOff(WORLD_X, forward);
  }
  up = normalize(up);
  const right = normalize(cross(up, back));
  // re-orthogonalize up so the basis is exactly orthonormal
  const trueUp = cross(back, right);
  return {
    point: hit.point,
    normal: hit.normal,
    position: [
      hit.point[0] + back[0] * depth,
      hit.point[1] + back[1] * depth,
      hit.point[2] + back[2] * depth,
    ],
    orientation: quatFromBasis(right, trueUp, back),
  };
}

function projectOff(v: Vec3, axis: Vec3): Vec3 {
  const d = dot(v, axis);
  return [v[0] - d * axis[0], v[1] - d * axis[1], v[2] - d * axis[2]];
}

/** Hamilton product a*b, both (x,y,z,w). */
export function quatMultiply(a: Quat, b: Quat): Quat {
  const [ax, ay, az, aw] = a;
  const [bx, by, bz, bw] = b;
  return [
    aw * bx + ax * bw + ay * bz - az * by,
    aw * by - ax * bz + ay * bw + az * bx,
    aw * bz + ax * by - ay * bx + az * bw,
    aw * bw - ax * bx - ay * by - az * bz,
  ];
}

/** Spin the preview projector about its own forward axis. */
export function rotateAboutForward(orientation: Quat, angle: number): Quat {
  // forward is the local -Z axis; rotating about it = post-multiplying a
  // local Z rotation by -angle
  const half = -angle / 2;
  const local: Quat = [0, 0, Math.sin(half), Math.cos(half)];
  return quatMultiply(orientation, local);
}

/** The exact JSON body the service expects for one stamp. */
export function buildStampRequest(
  preview: PlacementPreview,
  brush: BrushParams,
  decalId: string,
): StampRequest {
  const orientation =
    brush.rotation !== 0
      ? rotateAboutForward(preview.orientation, brush.rotation)
      : preview.orientation;
  return {
    position: [...preview.position],
    orientation: [...orientation],
    scale: [brush.scaleX, brush.scaleY, brush.depth],
    decal_id: decalId,
    blend_mode: brush.blendMode,
    filter: brush.filter,
    cull_cosine: brush.cullCosine,
    alpha_threshold: brush.alphaThreshold,
  };
}
