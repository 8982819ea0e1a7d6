#include "cns/convex_hull.hpp"

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <utility>

namespace cns {

namespace {

struct Face {
  std::array<int, 3> v;    // input point indices, arbitrary winding
  std::array<int, 3> adj;  // neighbor face across edge (v[e], v[(e+1)%3])
  Vec3 normal;             // unit outward
  double offset = 0.0;     // plane n·x = offset
  std::vector<int> outside;
  int far_point = -1;
  double far_dist = 0.0;
  bool alive = true;

  double dist(const Vec3& p) const { return dot(normal, p) - offset; }
};

struct Plane {
  Vec3 normal;
  double offset;
  bool ok;
};

Plane plane_through(const Vec3& a, const Vec3& b, const Vec3& c, double min_cross_len) {
  const Vec3 n = cross(b - a, c - a);
  const double len = n.norm();
  if (!(len > min_cross_len)) return {{}, 0.0, false};
  const Vec3 un = n / len;
  return {un, dot(un, (a + b + c) / 3.0), true};
}

class QuickHullBuilder {
 public:
  QuickHullBuilder(const std::vector<Vec3>& pts, double rank_tol, double vis_eps)
      : pts_(pts), rank_tol_(rank_tol), vis_eps_(vis_eps) {}

  void run();

  std::vector<Face> take_faces() { return std::move(faces_); }

 private:
  void initial_simplex();
  int make_face(int a, int b, int c);
  void orient_outward(Face& f) const;
  void assign_points(const std::vector<int>& candidates, const std::vector<int>& new_faces);
  void process_apex(int face_idx);
  int edge_slot(const Face& f, int a, int b) const;

  const std::vector<Vec3>& pts_;
  double rank_tol_;
  double vis_eps_;
  double min_cross_len_ = 0.0;
  Vec3 interior_;
  std::vector<Face> faces_;
  std::deque<int> pending_;
  std::vector<int> visit_mark_;
  int epoch_ = 0;
};

void QuickHullBuilder::orient_outward(Face& f) const {
  if (f.dist(interior_) > 0.0) {
    std::swap(f.v[1], f.v[2]);
    std::swap(f.adj[0], f.adj[2]);  // edges (v0,v1) and (v2,v0) swap roles
    f.normal = f.normal * -1.0;
    f.offset = -f.offset;
  }
}

int QuickHullBuilder::make_face(int a, int b, int c) {
  Face f;
  f.v = {a, b, c};
  f.adj = {-1, -1, -1};
  const Plane pl = plane_through(pts_[a], pts_[b], pts_[c], min_cross_len_);
  if (!pl.ok) return -1;
  f.normal = pl.normal;
  f.offset = pl.offset;
  faces_.push_back(std::move(f));
  return static_cast<int>(faces_.size()) - 1;
}

void QuickHullBuilder::initial_simplex() {
  const int n = static_cast<int>(pts_.size());

  // Extremes along the coordinate axes.
  std::array<int, 6> ext{0, 0, 0, 0, 0, 0};
  for (int i = 1; i < n; ++i) {
    if (pts_[i].x < pts_[ext[0]].x) ext[0] = i;
    if (pts_[i].x > pts_[ext[1]].x) ext[1] = i;
    if (pts_[i].y < pts_[ext[2]].y) ext[2] = i;
    if (pts_[i].y > pts_[ext[3]].y) ext[3] = i;
    if (pts_[i].z < pts_[ext[4]].z) ext[4] = i;
    if (pts_[i].z > pts_[ext[5]].z) ext[5] = i;
  }

  int e0 = ext[0], e1 = ext[1];
  double best = -1.0;
  for (int a = 0; a < 6; ++a)
    for (int b = a + 1; b < 6; ++b) {
      const double d = squared_dist(pts_[ext[a]], pts_[ext[b]]);
      if (d > best) {
        best = d;
        e0 = ext[a];
        e1 = ext[b];
      }
    }
  if (!(std::sqrt(best) > rank_tol_)) throw DegenerateInput("input points nearly coincide");

  // Farthest point from the line (e0, e1).
  const Vec3 u = pts_[e1] - pts_[e0];
  const double ulen = u.norm();
  int e2 = -1;
  best = -1.0;
  for (int i = 0; i < n; ++i) {
    const double d = cross(pts_[i] - pts_[e0], u).norm() / ulen;
    if (d > best) {
      best = d;
      e2 = i;
    }
  }
  if (!(best > rank_tol_)) throw DegenerateInput("input points are nearly collinear");

  // Farthest point from the plane (e0, e1, e2).
  const Plane base = plane_through(pts_[e0], pts_[e1], pts_[e2], 0.0);
  int e3 = -1;
  best = -1.0;
  for (int i = 0; i < n; ++i) {
    const double d = std::abs(dot(base.normal, pts_[i]) - base.offset);
    if (d > best) {
      best = d;
      e3 = i;
    }
  }
  if (!(best > rank_tol_)) throw DegenerateInput("input points are nearly coplanar");

  interior_ = (pts_[e0] + pts_[e1] + pts_[e2] + pts_[e3]) / 4.0;

  const int f0 = make_face(e0, e1, e2);
  const int f1 = make_face(e0, e1, e3);
  const int f2 = make_face(e0, e2, e3);
  const int f3 = make_face(e1, e2, e3);
  if (f0 < 0 || f1 < 0 || f2 < 0 || f3 < 0)
    throw DegenerateInput("initial simplex is numerically degenerate");
  for (Face& f : faces_) orient_outward(f);

  // Adjacency by shared-edge lookup (4 faces, every pair shares an edge).
  for (int i = 0; i < 4; ++i)
    for (int e = 0; e < 3; ++e) {
      const int a = faces_[i].v[e], b = faces_[i].v[(e + 1) % 3];
      for (int j = 0; j < 4; ++j) {
        if (j == i) continue;
        if (edge_slot(faces_[j], a, b) >= 0) {
          faces_[i].adj[e] = j;
          break;
        }
      }
    }

  std::vector<int> all;
  all.reserve(n);
  for (int i = 0; i < n; ++i)
    if (i != e0 && i != e1 && i != e2 && i != e3) all.push_back(i);
  assign_points(all, {0, 1, 2, 3});
}

int QuickHullBuilder::edge_slot(const Face& f, int a, int b) const {
  for (int e = 0; e < 3; ++e) {
    const int fa = f.v[e], fb = f.v[(e + 1) % 3];
    if ((fa == a && fb == b) || (fa == b && fb == a)) return e;
  }
  return -1;
}

void QuickHullBuilder::assign_points(const std::vector<int>& candidates,
                                     const std::vector<int>& new_faces) {
  for (int pi : candidates) {
    double best = vis_eps_;
    int best_face = -1;
    for (int fi : new_faces) {
      const double d = faces_[fi].dist(pts_[pi]);
      if (d > best) {
        best = d;
        best_face = fi;
      }
    }
    if (best_face < 0) continue;  // interior; drop
    Face& f = faces_[best_face];
    f.outside.push_back(pi);
    if (best > f.far_dist) {
      f.far_dist = best;
      f.far_point = pi;
    }
  }
  for (int fi : new_faces)
    if (!faces_[fi].outside.empty()) pending_.push_back(fi);
}

void QuickHullBuilder::process_apex(int face_idx) {
  const int apex = faces_[face_idx].far_point;
  const Vec3& ap = pts_[apex];

  // Flood-fill the visible region.
  ++epoch_;
  visit_mark_.resize(faces_.size(), 0);
  std::vector<int> visible{face_idx};
  visit_mark_[face_idx] = epoch_;
  struct HorizonEdge {
    int a, b;     // edge endpoints as seen from the visible side
    int hidden;   // face that stays alive across this edge
  };
  std::vector<HorizonEdge> horizon;
  for (std::size_t k = 0; k < visible.size(); ++k) {
    const int fi = visible[k];
    for (int e = 0; e < 3; ++e) {
      const int nb = faces_[fi].adj[e];
      if (nb < 0) throw Error("hull construction lost face adjacency");
      if (visit_mark_[nb] == epoch_) continue;
      if (faces_[nb].dist(ap) > vis_eps_) {
        visit_mark_[nb] = epoch_;
        visible.push_back(nb);
      } else {
        horizon.push_back({faces_[fi].v[e], faces_[fi].v[(e + 1) % 3], nb});
      }
    }
  }

  // Collect orphaned candidate points before killing faces.
  std::vector<int> orphans;
  for (int fi : visible) {
    for (int pi : faces_[fi].outside)
      if (pi != apex) orphans.push_back(pi);
    faces_[fi].alive = false;
    faces_[fi].outside.clear();
    faces_[fi].far_point = -1;
    faces_[fi].far_dist = 0.0;
  }

  // One new face per horizon edge, fanned around the apex.
  std::map<std::pair<int, int>, std::pair<int, int>> open_edges;  // (lo,hi) -> (face, slot)
  std::vector<int> created;
  created.reserve(horizon.size());
  for (const HorizonEdge& he : horizon) {
    int nf = make_face(he.a, he.b, apex);
    if (nf < 0) {
      // Apex nearly collinear with the horizon edge: reuse the hidden
      // neighbor's plane for this sliver face so orientation stays sane.
      Face f;
      f.v = {he.a, he.b, apex};
      f.adj = {-1, -1, -1};
      f.normal = faces_[he.hidden].normal;
      f.offset = faces_[he.hidden].offset;
      faces_.push_back(std::move(f));
      nf = static_cast<int>(faces_.size()) - 1;
    }
    orient_outward(faces_[nf]);
    created.push_back(nf);
    visit_mark_.resize(faces_.size(), 0);

    // Stitch adjacency: the horizon edge connects to the hidden face, the
    // two apex edges connect to sibling new faces once both sides exist.
    Face& f = faces_[nf];
    for (int e = 0; e < 3; ++e) {
      const int a = f.v[e], b = f.v[(e + 1) % 3];
      if ((a == he.a && b == he.b) || (a == he.b && b == he.a)) {
        f.adj[e] = he.hidden;
        const int hs = edge_slot(faces_[he.hidden], a, b);
        faces_[he.hidden].adj[hs] = nf;
      } else {
        const auto key = std::minmax(a, b);
        auto it = open_edges.find(key);
        if (it == open_edges.end()) {
          open_edges.emplace(key, std::make_pair(nf, e));
        } else {
          f.adj[e] = it->second.first;
          faces_[it->second.first].adj[it->second.second] = nf;
          open_edges.erase(it);
        }
      }
    }
  }
  if (!open_edges.empty()) throw Error("hull construction lost horizon topology");

  std::sort(orphans.begin(), orphans.end());
  orphans.erase(std::unique(orphans.begin(), orphans.end()), orphans.end());
  assign_points(orphans, created);
}

void QuickHullBuilder::run() {
  Aabb box;
  for (const Vec3& p : pts_) box.expand(p);
  const double diag = box.diagonal();
  // Guards the cross-product length when building face planes; 2*area of a
  // meaningful face is far above this.
  min_cross_len_ = std::max(1e-300, diag * diag * 1e-14);

  initial_simplex();

  const std::size_t max_iters = 16 * pts_.size() + 64;
  std::size_t iters = 0;
  while (!pending_.empty()) {
    const int fi = pending_.front();
    pending_.pop_front();
    if (!faces_[fi].alive || faces_[fi].outside.empty()) continue;
    if (++iters > max_iters) throw Error("hull construction did not converge");
    process_apex(fi);
  }
}

}  // namespace

ConvexHull3 quickhull(const PointCloud& points, double eps) {
  if (points.size() < 4)
    throw DegenerateInput("convex hull needs at least 4 points, got " +
                          std::to_string(points.size()));

  const Aabb box = points.bounds();
  const double diag = box.diagonal();
  const double rank_tol = 1e-7 * diag;
  const double vis_eps = std::max(1e-9 * diag, 1e-13);

  QuickHullBuilder builder(points.points, rank_tol, vis_eps);
  builder.run();
  const std::vector<Face> faces = builder.take_faces();

  ConvexHull3 hull;
  hull.eps_ = eps < 0.0 ? 1e-6 * diag : eps;

  std::vector<int> remap(points.size(), -1);
  for (const Face& f : faces) {
    if (!f.alive) continue;
    std::array<int, 3> tri;
    for (int e = 0; e < 3; ++e) {
      const int pi = f.v[e];
      if (remap[pi] < 0) {
        remap[pi] = static_cast<int>(hull.vertices_.size());
        hull.vertices_.push_back(points.points[pi]);
      }
      tri[e] = remap[pi];
    }
    hull.facet_vertices_.push_back(tri);
    hull.facets_.push_back({f.normal, f.offset});
  }
  return hull;
}

PointCloud hull_restrict(const PointCloud& source, const ConvexHull3& hull) {
  std::vector<char> keep(source.size());
  const std::int64_t n = static_cast<std::int64_t>(source.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::int64_t i = 0; i < n; ++i) keep[i] = hull.contains(source.points[i]);

  PointCloud out;
  for (std::int64_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    out.points.push_back(source.points[i]);
    if (source.has_intensity()) out.intensity.push_back(source.intensity[i]);
  }
  return out;
}

}  // namespace cns
