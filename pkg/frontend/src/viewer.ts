// three.js viewport: renders the session mesh with its live texture,
// a projector preview box, and a minimal orbit camera.

import * as THREE from "three";
import type { MeshData, PlacementPreview, Vec3 } from "./picking.js";

export class Viewer {
  readonly renderer: THREE.WebGLRenderer;
  readonly scene = new THREE.Scene();
  readonly camera: THREE.PerspectiveCamera;
  private mesh: THREE.Mesh | null = null;
  private gizmo: THREE.LineSegments | null = null;
  private textureUrl: string | null = null;

  // orbit state
  private theta = Math.PI / 4;
  private phi = Math.PI / 3;
  private radius = 3;
  private target = new THREE.Vector3(0.5, 0.5, 0);
  private dragging = false;

  constructor(readonly canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.camera = new THREE.PerspectiveCamera(45, 1, 0.01, 100);
    this.scene.background = new THREE.Color(0x20242a);
    const key = new THREE.DirectionalLight(0xffffff, 1.2);
    key.position.set(2, 3, 4);
    this.scene.add(key);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.8));
    this.attachOrbit();
    this.resize();
    window.addEventListener("resize", () => this.resize());
    this.renderer.setAnimationLoop(() => this.renderFrame());
  }

  private attachOrbit() {
    this.canvas.addEventListener("pointerdown", (e) => {
      if (e.button === 2 || e.shiftKey) {
        this.dragging = true;
        this.canvas.setPointerCapture(e.pointerId);
      }
    });
    this.canvas.addEventListener("pointerup", () => (this.dragging = false));
    this.canvas.addEventListener("pointermove", (e) => {
      if (!this.dragging) return;
      this.theta -= e.movementX * 0.008;
      this.phi = Math.min(Math.max(this.phi - e.movementY * 0.008, 0.05), Math.PI - 0.05);
    });
    this.canvas.addEventListener(
      "wheel",
      (e) => {
        if (e.ctrlKey) return; // brush scale owns ctrl+wheel
        this.radius = Math.min(Math.max(this.radius * Math.exp(e.deltaY * 0.001), 0.2), 20);
        e.preventDefault();
      },
      { passive: false },
    );
    this.canvas.addEventListener("contextmenu", (e) => e.preventDefault());
  }

  private resize() {
    const w = this.canvas.clientWidth || this.canvas.width;
    const h = this.canvas.clientHeight || this.canvas.height;
    this.renderer.setSize(w, h, false);
    this.camera.aspect = w / h;
    this.camera.updateProjectionMatrix();
  }

  private renderFrame() {
    const sp = Math.sin(this.phi), cp = Math.cos(this.phi);
    const st = Math.sin(this.theta), ct = Math.cos(this.theta);
    this.camera.position.set(
      this.target.x + this.radius * sp * ct,
      this.target.y + this.radius * cp,
      this.target.z + this.radius * sp * st,
    );
    this.camera.lookAt(this.target);
    this.renderer.render(this.scene, this.camera);
  }

  setMesh(data: MeshData) {
    if (this.mesh) {
      this.scene.remove(this.mesh);
      this.mesh.geometry.dispose();
    }
    const geometry = new THREE.BufferGeometry();
    geometry.setAttribute("position", new THREE.BufferAttribute(data.positions, 3));
    geometry.setAttribute("normal", new THREE.BufferAttribute(data.normals, 3));
    geometry.setAttribute("uv", new THREE.BufferAttribute(data.uvs, 2));
    geometry.computeBoundingSphere();
    const material = new THREE.MeshLambertMaterial({ side: THREE.DoubleSide });
    this.mesh = new THREE.Mesh(geometry, material);
    this.scene.add(this.mesh);
    const sphere = geometry.boundingSphere;
    if (sphere) {
      this.target.copy(sphere.center);
      this.radius = Math.max(sphere.radius * 2.8, 0.5);
    }
  }

  /** Swap in texture bytes fetched from the service. */
  async setTexturePng(bytes: Uint8Array) {
    if (!this.mesh) return;
    const blob = new Blob([bytes as BlobPart], { type: "image/png" });
    const url = URL.createObjectURL(blob);
    const texture = await new THREE.TextureLoader().loadAsync(url);
    texture.colorSpace = THREE.SRGBColorSpace;
    texture.magFilter = THREE.NearestFilter;
    const material = this.mesh.material as THREE.MeshLambertMaterial;
    material.map?.dispose();
    material.map = texture;
    material.needsUpdate = true;
    if (this.textureUrl) URL.revokeObjectURL(this.textureUrl);
    this.textureUrl = url;
  }

  /** Camera ray through a canvas pixel, for picking. */
  rayThrough(clientX: number, clientY: number): { origin: Vec3; direction: Vec3 } {
    const rect = this.canvas.getBoundingClientRect();
    const ndc = new THREE.Vector2(
      ((clientX - rect.left) / rect.width) * 2 - 1,
      -((clientY - rect.top) / rect.height) * 2 + 1,
    );
    const raycaster = new THREE.Raycaster();
    raycaster.setFromCamera(ndc, this.camera);
    const o = raycaster.ray.origin, d = raycaster.ray.direction;
    return { origin: [o.x, o.y, o.z], direction: [d.x, d.y, d.z] };
  }

  /** Show the projector box for the current preview (2x2x2 unit box
   * scaled by the half-extents). */
  showPreview(preview: PlacementPreview | null, scale: Vec3) {
    if (this.gizmo) {
      this.scene.remove(this.gizmo);
      this.gizmo.geometry.dispose();
      this.gizmo = null;
    }
    if (!preview) return;
    const box = new THREE.BoxGeometry(2 * scale[0], 2 * scale[1], 2 * scale[2]);
    const edges = new THREE.EdgesGeometry(box);
    box.dispose();
    this.gizmo = new THREE.LineSegments(
      edges,
      new THREE.LineBasicMaterial({ color: 0xffcc33 }),
    );
    this.gizmo.position.set(...preview.position);
    this.gizmo.quaternion.set(...preview.orientation);
    this.scene.add(this.gizmo);
  }
}
