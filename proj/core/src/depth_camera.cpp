#include "terrasight/depth_camera.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "terrasight/errors.hpp"

namespace terrasight {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

// Ray with precomputed reciprocals; a zero component has inv = 0 and is
// handled by the callers' zero checks.
struct Ray {
  Eigen::Vector3d o;
  Eigen::Vector3d d;
  double inv[3];

  Ray(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir) : o(origin), d(dir) {
    for (int k = 0; k < 3; ++k) {
      inv[k] = d[k] != 0.0 ? 1.0 / d[k] : 0.0;
    }
  }
};

// Entry distance of the ray into the column [x0, x1] x [y0, y1] x (-inf, h],
// or kInf when it misses. Returns 0 when the origin is inside.
double column_entry(const Prism& p, const Ray& ray) {
  double t0 = -kInf;
  double t1 = kInf;
  const double lo[2] = {p.x0, p.y0};
  const double hi[2] = {p.x1, p.y1};
  for (int axis = 0; axis < 2; ++axis) {
    if (ray.d[axis] == 0.0) {
      if (ray.o[axis] < lo[axis] || ray.o[axis] > hi[axis]) {
        return kInf;
      }
      continue;
    }
    double ta = (lo[axis] - ray.o[axis]) * ray.inv[axis];
    double tb = (hi[axis] - ray.o[axis]) * ray.inv[axis];
    if (ta > tb) {
      std::swap(ta, tb);
    }
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  // Half-space z <= h.
  if (ray.d.z() == 0.0) {
    if (ray.o.z() > p.height) {
      return kInf;
    }
  } else {
    const double tz = (p.height - ray.o.z()) * ray.inv[2];
    if (ray.d.z() < 0.0) {
      t0 = std::max(t0, tz);
    } else {
      t1 = std::min(t1, tz);
    }
  }
  if (t0 > t1 || t1 < 0.0) {
    return kInf;
  }
  return std::max(t0, 0.0);
}

// Exact first hit against prisms and the ground plane z = 0, walking the
// bucket grid front to back.
double cast_prisms(const HeightField& field, const Ray& ray, double max_distance) {
  const Eigen::Vector3d& o = ray.o;
  const Eigen::Vector3d& d = ray.d;
  double best = d.z() < 0.0 ? -o.z() * ray.inv[2] : kInf;
  if (field.prisms().empty()) {
    return best <= max_distance ? best : kInf;
  }
  double t_begin = 0.0;
  if (o.z() > field.max_height()) {
    if (d.z() >= 0.0) {
      return best <= max_distance ? best : kInf;
    }
    t_begin = (field.max_height() - o.z()) * ray.inv[2];
  }
  const double t_limit = std::min(best, max_distance);

  // Clip to the bucket grid in xy.
  const double grid_lo = -HeightField::kOverhang;
  const double grid_hi = HeightField::kExtent + HeightField::kOverhang;
  double ta = t_begin;
  double tb = t_limit;
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (o[axis] < grid_lo || o[axis] > grid_hi) {
        return best <= max_distance ? best : kInf;
      }
      continue;
    }
    double t0 = (grid_lo - o[axis]) * ray.inv[axis];
    double t1 = (grid_hi - o[axis]) * ray.inv[axis];
    if (t0 > t1) {
      std::swap(t0, t1);
    }
    ta = std::max(ta, t0);
    tb = std::min(tb, t1);
  }
  if (ta <= tb) {
    int ix = HeightField::bucket_index(o.x() + ta * d.x());
    int iy = HeightField::bucket_index(o.y() + ta * d.y());
    const int step_x = d.x() > 0.0 ? 1 : -1;
    const int step_y = d.y() > 0.0 ? 1 : -1;
    auto next_boundary = [&](int axis, int cell, int step) {
      if (d[axis] == 0.0) {
        return kInf;
      }
      const double edge = HeightField::bucket_origin(step > 0 ? cell + 1 : cell);
      return (edge - o[axis]) * ray.inv[axis];
    };
    double t_next_x = next_boundary(0, ix, step_x);
    double t_next_y = next_boundary(1, iy, step_y);
    const double dt_x = d.x() == 0.0 ? kInf : HeightField::kBucketSize * std::abs(ray.inv[0]);
    const double dt_y = d.y() == 0.0 ? kInf : HeightField::kBucketSize * std::abs(ray.inv[1]);
    double t = ta;
    while (true) {
      const double t_out = std::min(std::min(t_next_x, t_next_y), tb);
      const double z_low = o.z() + d.z() * (d.z() < 0.0 ? t_out : t);
      if (z_low <= field.bucket_max_height(ix, iy)) {
        for (std::uint32_t index : field.bucket_prisms(ix, iy)) {
          const double hit = column_entry(field.prisms()[index], ray);
          if (hit < best) {
            best = hit;
          }
        }
      }
      if (best <= t_out || t_out >= tb) {
        break;
      }
      if (t_next_x < t_next_y) {
        ix += step_x;
        t = t_next_x;
        t_next_x += dt_x;
      } else {
        iy += step_y;
        t = t_next_y;
        t_next_y += dt_y;
      }
      if (ix < 0 || iy < 0 || ix >= HeightField::kBuckets || iy >= HeightField::kBuckets) {
        break;
      }
    }
  }
  return best <= max_distance ? best : kInf;
}

struct HillSample {
  double f;
  double slope;
};

// f(t) = ray height above the hill surface and its derivative along t.
HillSample hill_sample(const HeightField& field, const Eigen::Vector3d& o, const Eigen::Vector3d& d, double t) {
  const double x = o.x() + t * d.x();
  const double y = o.y() + t * d.y();
  Eigen::Vector2d g;
  const double h = field.hill_height_gradient(x, y, g);
  return {o.z() + t * d.z() - h, d.z() - (g.x() * d.x() + g.y() * d.y())};
}

enum class HillMode { Miss, Newton, Trace };

// Per-ray solver state for the smooth-only field.
struct HillRay {
  HillMode mode = HillMode::Miss;
  double t_lo = 0.0;
  double t_hi = 0.0;
  // Newton bracket, iterate and error scale.
  double a = 0.0;
  double b = 0.0;
  double t = 0.0;
  double curvature = 0.0;
  int iter = 0;
};

HillRay hill_setup(const HeightField& field, const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                   double max_distance, double guess) {
  HillRay ray;
  const double slope = field.hill_slope_bound();
  const double dxy = std::sqrt(d.x() * d.x() + d.y() * d.y());
  double t_lo = 0.0;
  if (o.z() > field.max_height()) {
    if (d.z() >= 0.0) {
      return ray;
    }
    t_lo = (o.z() - field.max_height()) / -d.z();
  }
  double t_hi = d.z() < 0.0 ? (o.z() - field.min_height()) / -d.z() : max_distance;
  // Below min_height at t_hi unless the range cut it short.
  const bool capped = t_hi > max_distance;
  t_hi = std::min(t_hi, max_distance);
  if (t_lo > t_hi) {
    return ray;
  }
  ray.t_lo = t_lo;
  ray.t_hi = t_hi;
  if (-d.z() > slope * dxy) {
    // f is strictly decreasing: a single root, found by bracketed Newton.
    if (capped && o.z() + t_hi * d.z() > field.hill_height(o.x() + t_hi * d.x(), o.y() + t_hi * d.y())) {
      return ray;
    }
    ray.mode = HillMode::Newton;
    ray.a = t_lo;
    ray.b = t_hi;
    // Newton's error after a step of size delta is at most curvature * delta^2.
    ray.curvature = field.hill_curvature_bound() * dxy * dxy / (2.0 * (-d.z() - slope * dxy));
    ray.t = (guess > t_lo && guess < t_hi) ? guess : 0.5 * (t_lo + t_hi);
    return ray;
  }
  // General case: conservative sphere tracing never steps past the first root.
  if (-d.z() + slope * dxy > 0.0) {
    ray.mode = HillMode::Trace;
  }
  return ray;
}

// One Newton update from f and df/dt at ray.t. Returns true with `root` set
// once converged.
bool hill_newton_update(HillRay& ray, double f, double slope, double& root) {
  if (f == 0.0) {
    root = ray.t;
    return true;
  }
  if (f > 0.0) {
    ray.a = ray.t;
  } else {
    ray.b = ray.t;
  }
  double next = slope < 0.0 ? ray.t - f / slope : 0.5 * (ray.a + ray.b);
  const double delta = std::abs(next - ray.t);
  if (delta < 1e-9 || ray.curvature * delta * delta < 1e-10) {
    root = std::clamp(next, ray.a, ray.b);
    return true;
  }
  if (!(next > ray.a && next < ray.b)) {
    next = 0.5 * (ray.a + ray.b);
  }
  if (ray.b - ray.a < 1e-9) {
    root = next;
    return true;
  }
  ray.t = next;
  if (++ray.iter >= 200) {
    root = ray.t;
    return true;
  }
  return false;
}

double hill_trace(const HeightField& field, const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                  const HillRay& ray) {
  const double rate = -d.z() + field.hill_slope_bound() * std::sqrt(d.x() * d.x() + d.y() * d.y());
  double t = ray.t_lo;
  for (int iter = 0; iter < 100000; ++iter) {
    const double f = o.z() + t * d.z() - field.hill_height(o.x() + t * d.x(), o.y() + t * d.y());
    if (f < 1e-10) {
      return t;
    }
    t += f / rate;
    if (t > ray.t_hi) {
      return kInf;
    }
  }
  return t;
}

double cast_hills(const HeightField& field, const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                  double max_distance, double guess) {
  HillRay ray = hill_setup(field, o, d, max_distance, guess);
  if (ray.mode == HillMode::Trace) {
    return hill_trace(field, o, d, ray);
  }
  if (ray.mode == HillMode::Miss) {
    return kInf;
  }
  double root = 0.0;
  for (;;) {
    const HillSample s = hill_sample(field, o, d, ray.t);
    if (hill_newton_update(ray, s.f, s.slope, root)) {
      return root;
    }
  }
}

// Fields mixing prisms and hills: 2 mm marching refined by bisection.
double cast_mixed(const HeightField& field, const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                  double max_distance) {
  const double step = 0.002;
  auto below = [&](double t) {
    const Eigen::Vector3d p = o + t * d;
    return p.z() <= field.surface_height(p.x(), p.y());
  };
  double prev = 0.0;
  for (double t = step; t <= max_distance; t += step) {
    if (below(t)) {
      double a = prev;
      double b = t;
      for (int i = 0; i < 60; ++i) {
        const double m = 0.5 * (a + b);
        (below(m) ? b : a) = m;
      }
      return b;
    }
    prev = t;
  }
  return kInf;
}

}  // namespace

void CameraModel::validate() const {
  std::ostringstream msg;
  if (!(tilt_deg >= 0.0 && tilt_deg < 90.0)) {
    msg << "camera tilt " << tilt_deg << " deg outside [0, 90)";
  } else if (!(hfov_deg > 0.0 && hfov_deg < 180.0) || !(vfov_deg > 0.0 && vfov_deg < 180.0)) {
    msg << "camera field of view must lie in (0, 180) degrees";
  } else if (raw_width != 848 || raw_height != 480) {
    msg << "raw resolution is fixed at 848x480";
  } else if (out_width <= 0 || out_height <= 0) {
    msg << "output resolution must be positive";
  } else if (!(clip_min > 0.0 && clip_min < clip_max)) {
    msg << "clip range must satisfy 0 < min < max";
  } else {
    return;
  }
  throw ConfigError(msg.str());
}

CameraFrame camera_frame(const BasePose& pose, const CameraModel& camera) {
  const Eigen::Matrix3d r = pose.rotation();
  const double tilt = deg2rad(camera.tilt_deg);
  CameraFrame frame;
  frame.origin = pose.position + r * camera.mount_offset;
  frame.forward = r * Eigen::Vector3d(std::cos(tilt), 0.0, -std::sin(tilt));
  frame.right = r * Eigen::Vector3d(0.0, -1.0, 0.0);
  frame.down = r * Eigen::Vector3d(-std::sin(tilt), 0.0, -std::cos(tilt));
  return frame;
}

Eigen::Vector3d pixel_ray(const CameraFrame& frame, const CameraModel& camera, double u, double v, int width,
                          int height) {
  const double x = (2.0 * u / width - 1.0) * std::tan(deg2rad(camera.hfov_deg) / 2.0);
  const double y = (2.0 * v / height - 1.0) * std::tan(deg2rad(camera.vfov_deg) / 2.0);
  // Same association as render_depth so both give bit-identical rays.
  const Eigen::Vector3d row_dir = frame.forward + y * frame.down;
  return (row_dir + x * frame.right).normalized();
}

DepthImage::DepthImage(int width, int height, float fill, bool valid)
    : width_(width),
      height_(height),
      depth_(static_cast<std::size_t>(width) * height, fill),
      valid_(static_cast<std::size_t>(width) * height, valid ? 1 : 0) {}

std::size_t DepthImage::valid_count() const noexcept {
  return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), std::uint8_t{1}));
}

double cast_ray(const HeightField& field, const Eigen::Vector3d& origin, const Eigen::Vector3d& direction,
                double max_distance, double guess) {
  const bool has_hills = !field.hills().empty();
  const bool has_prisms = !field.prisms().empty();
  if (has_hills && has_prisms) {
    return cast_mixed(field, origin, direction, max_distance);
  }
  if (has_hills) {
    return cast_hills(field, origin, direction, max_distance, guess);
  }
  return cast_prisms(field, Ray(origin, direction), max_distance);
}

DepthImage render_depth(const HeightField& field, const BasePose& pose, const CameraModel& camera) {
  return render_depth(field, pose, camera, camera.raw_width, camera.raw_height);
}

namespace {

constexpr double kMaxRayDistance = 100.0;

// Inclusive pixel range of a row whose rays can meet the box, or lo > hi.
// The row's rays F + x R (F orthogonal to R) span a plane through the
// origin; a ray meets the box only if its x lies in the x-range of the
// convex section plane/box. The range is padded by one pixel and widened
// to the full row when the section reaches behind the camera.
// `near` receives a lower bound on the distance of any hit in the range.
std::pair<int, int> row_span(const Prism& prism, const Eigen::Vector3d& origin, const Eigen::Vector3d& f,
                             const Eigen::Vector3d& r, const Eigen::Vector3d& normal, double tan_h, int width,
                             double& near) {
  Eigen::Vector3d corners[8];
  double side[8];
  int positive = 0;
  int negative = 0;
  for (int k = 0; k < 8; ++k) {
    corners[k] = Eigen::Vector3d((k & 1) ? prism.x1 : prism.x0, (k & 2) ? prism.y1 : prism.y0,
                                 (k & 4) ? prism.height : 0.0) -
                 origin;
    side[k] = corners[k].dot(normal);
    positive += side[k] > 0.0;
    negative += side[k] < 0.0;
  }
  if (positive == 8 || negative == 8) {
    return {1, 0};
  }
  const double f2 = f.squaredNorm();
  const double f_norm = std::sqrt(f2);
  double x_min = kInf;
  double x_max = -kInf;
  bool behind = false;
  bool ahead = false;
  double along_min = kInf;
  auto add = [&](const Eigen::Vector3d& p) {
    const double along = p.dot(f);
    along_min = std::min(along_min, along);
    ahead = ahead || along > 0.0;
    if (along <= 1e-9 * p.norm()) {
      behind = true;
      return;
    }
    const double x = p.dot(r) * f2 / along;
    x_min = std::min(x_min, x);
    x_max = std::max(x_max, x);
  };
  for (int k = 0; k < 8; ++k) {
    if (side[k] == 0.0) {
      add(corners[k]);
    }
    for (int bit = 1; bit < 8; bit <<= 1) {
      const int l = k | bit;
      if (l == k) {
        continue;
      }
      if ((side[k] < 0.0 && side[l] > 0.0) || (side[k] > 0.0 && side[l] < 0.0)) {
        add(corners[k] + (corners[l] - corners[k]) * (side[k] / (side[k] - side[l])));
      }
    }
  }
  // Every ray has a positive component along f, so a section entirely
  // behind the camera is never hit. |p| >= p.f / |f| bounds hit distances.
  if (!ahead) {
    return {1, 0};
  }
  near = std::max(0.0, along_min / f_norm);
  if (behind) {
    return {0, width - 1};
  }
  // Pixel i looks along x_i = (2 (i + 0.5) / width - 1) tan_h.
  const double to_pixel = 0.5 * width / tan_h;
  const double lo = std::floor(x_min * to_pixel + 0.5 * width - 0.5) - 1.0;
  const double hi = std::ceil(x_max * to_pixel + 0.5 * width - 0.5) + 1.0;
  return {static_cast<int>(std::max(lo, 0.0)), static_cast<int>(std::min(hi, width - 1.0))};
}

// Prism fields: same values as cast_ray per pixel, with the candidate
// prisms of each pixel found per row instead of by walking buckets.
void render_prism_rows(const HeightField& field, const CameraFrame& frame, const std::vector<double>& xs,
                       double tan_h, double tan_v, DepthImage& image) {
  const int width = image.width();
  const int height = image.height();
  std::vector<Ray> rays;
  rays.reserve(static_cast<std::size_t>(width));
  std::vector<double> best(static_cast<std::size_t>(width));
  // Nearest boxes first; a box farther than every current hit in its span
  // cannot change the result.
  struct Candidate {
    const Prism* prism;
    double distance;
  };
  std::vector<Candidate> order;
  order.reserve(field.prisms().size());
  for (const Prism& p : field.prisms()) {
    const Eigen::Vector3d o = frame.origin;
    const Eigen::Vector3d nearest(std::clamp(o.x(), p.x0, p.x1), std::clamp(o.y(), p.y0, p.y1),
                                  std::clamp(o.z(), 0.0, p.height));
    order.push_back({&p, (nearest - o).norm()});
  }
  std::stable_sort(order.begin(), order.end(),
                   [](const Candidate& a, const Candidate& b) { return a.distance < b.distance; });
  for (int j = 0; j < height; ++j) {
    const double y = (2.0 * (j + 0.5) / height - 1.0) * tan_v;
    const Eigen::Vector3d row_dir = frame.forward + y * frame.down;
    rays.clear();
    for (int i = 0; i < width; ++i) {
      rays.emplace_back(frame.origin, (row_dir + xs[i] * frame.right).normalized());
      const Ray& ray = rays.back();
      best[i] = ray.d.z() < 0.0 ? -ray.o.z() * ray.inv[2] : kInf;
    }
    const Eigen::Vector3d normal = row_dir.cross(frame.right);
    for (const Candidate& c : order) {
      double near = 0.0;
      const auto [lo, hi] = row_span(*c.prism, frame.origin, row_dir, frame.right, normal, tan_h, width, near);
      const double bound = std::max(near, c.distance);
      if (lo > hi || Eigen::Map<const Eigen::ArrayXd>(best.data() + lo, hi - lo + 1).maxCoeff() <= bound) {
        continue;
      }
      for (int i = lo; i <= hi; ++i) {
        if (best[i] > bound) {
          const double hit = column_entry(*c.prism, rays[i]);
          if (hit < best[i]) {
            best[i] = hit;
          }
        }
      }
    }
    for (int i = 0; i < width; ++i) {
      if (best[i] <= kMaxRayDistance) {
        image.at(i, j) = static_cast<float>(best[i]);
        image.set_valid(i, j, true);
      }
    }
  }
}

// Smooth-only fields: the Newton iterations of a whole row advance together
// so the wave sums are evaluated in batches. Each pixel follows exactly the
// cast_ray iteration warm-started from the pixel above.
void render_hill_rows(const HeightField& field, const CameraFrame& frame, const std::vector<double>& xs,
                      double tan_v, DepthImage& image) {
  const int width = image.width();
  const int height = image.height();
  const Eigen::Vector3d& o = frame.origin;
  std::vector<Eigen::Vector3d> dirs(static_cast<std::size_t>(width));
  std::vector<HillRay> rays(static_cast<std::size_t>(width));
  std::vector<double> result(static_cast<std::size_t>(width));
  std::vector<double> previous(static_cast<std::size_t>(width), -1.0);
  std::vector<int> active;
  std::vector<double> px(static_cast<std::size_t>(width));
  std::vector<double> py(static_cast<std::size_t>(width));
  std::vector<double> h(static_cast<std::size_t>(width));
  std::vector<double> gx(static_cast<std::size_t>(width));
  std::vector<double> gy(static_cast<std::size_t>(width));
  for (int j = 0; j < height; ++j) {
    const double y = (2.0 * (j + 0.5) / height - 1.0) * tan_v;
    const Eigen::Vector3d row_dir = frame.forward + y * frame.down;
    active.clear();
    for (int i = 0; i < width; ++i) {
      dirs[i] = (row_dir + xs[i] * frame.right).normalized();
      rays[i] = hill_setup(field, o, dirs[i], kMaxRayDistance, previous[i]);
      result[i] = kInf;
      if (rays[i].mode == HillMode::Newton) {
        active.push_back(i);
      } else if (rays[i].mode == HillMode::Trace) {
        result[i] = hill_trace(field, o, dirs[i], rays[i]);
      }
    }
    while (!active.empty()) {
      const std::size_t n = active.size();
      for (std::size_t k = 0; k < n; ++k) {
        const int i = active[k];
        px[k] = o.x() + rays[i].t * dirs[i].x();
        py[k] = o.y() + rays[i].t * dirs[i].y();
      }
      field.hill_height_gradient_batch(px.data(), py.data(), n, h.data(), gx.data(), gy.data());
      std::size_t kept = 0;
      for (std::size_t k = 0; k < n; ++k) {
        const int i = active[k];
        const Eigen::Vector3d& d = dirs[i];
        const double f = o.z() + rays[i].t * d.z() - h[k];
        const double slope = d.z() - (gx[k] * d.x() + gy[k] * d.y());
        if (!hill_newton_update(rays[i], f, slope, result[i])) {
          active[kept++] = i;
        }
      }
      active.resize(kept);
    }
    for (int i = 0; i < width; ++i) {
      if (result[i] < kInf) {
        image.at(i, j) = static_cast<float>(result[i]);
        image.set_valid(i, j, true);
        previous[i] = result[i];
      } else {
        previous[i] = -1.0;
      }
    }
  }
}

}  // namespace

DepthImage render_depth(const HeightField& field, const BasePose& pose, const CameraModel& camera, int width,
                        int height) {
  const CameraFrame frame = camera_frame(pose, camera);
  if (frame.origin.z() <= field.surface_height(frame.origin.x(), frame.origin.y())) {
    DepthImage image(width, height, 0.0f, false);
    image.camera_inside_terrain = true;
    return image;
  }
  const double tan_h = std::tan(deg2rad(camera.hfov_deg) / 2.0);
  const double tan_v = std::tan(deg2rad(camera.vfov_deg) / 2.0);
  std::vector<double> xs(static_cast<std::size_t>(width));
  for (int i = 0; i < width; ++i) {
    xs[i] = (2.0 * (i + 0.5) / width - 1.0) * tan_h;
  }
  DepthImage image(width, height, 0.0f, false);
  if (field.hills().empty()) {
    render_prism_rows(field, frame, xs, tan_h, tan_v, image);
    return image;
  }
  if (field.prisms().empty()) {
    render_hill_rows(field, frame, xs, tan_v, image);
    return image;
  }
  for (int j = 0; j < height; ++j) {
    const double y = (2.0 * (j + 0.5) / height - 1.0) * tan_v;
    const Eigen::Vector3d row_dir = frame.forward + y * frame.down;
    double guess = -1.0;
    for (int i = 0; i < width; ++i) {
      const Eigen::Vector3d dir = (row_dir + xs[i] * frame.right).normalized();
      const double t = cast_ray(field, frame.origin, dir, kMaxRayDistance, guess);
      if (t < kInf) {
        image.at(i, j) = static_cast<float>(t);
        image.set_valid(i, j, true);
        guess = t;
      }
    }
  }
  return image;
}

DepthImage fill_holes(const DepthImage& image) {
  DepthImage out = image;
  if (out.fully_invalid()) {
    return out;
  }
  const int w = out.width();
  const int h = out.height();
  std::vector<std::pair<int, int>> holes;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!out.valid(x, y)) {
        holes.emplace_back(x, y);
      }
    }
  }
  struct Fill {
    int x;
    int y;
    float value;
  };
  std::vector<Fill> fills;
  std::vector<std::pair<int, int>> remaining;
  while (!holes.empty()) {
    fills.clear();
    remaining.clear();
    for (const auto& [x, y] : holes) {
      double sum = 0.0;
      int count = 0;
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] >= 0 && nx[k] < w && ny[k] >= 0 && ny[k] < h && out.valid(nx[k], ny[k])) {
          sum += out.at(nx[k], ny[k]);
          ++count;
        }
      }
      if (count > 0) {
        fills.push_back({x, y, static_cast<float>(sum / count)});
      } else {
        remaining.emplace_back(x, y);
      }
    }
    if (fills.empty()) {
      break;
    }
    // Apply after the sweep so the result does not depend on visit order.
    for (const Fill& f : fills) {
      out.at(f.x, f.y) = f.value;
      out.set_valid(f.x, f.y, true);
    }
    holes.swap(remaining);
  }
  return out;
}

namespace {

struct Tap {
  int index;
  double weight;
};

// Overlap weights of output cells on input cells along one axis.
std::vector<std::vector<Tap>> area_taps(int in, int out) {
  std::vector<std::vector<Tap>> taps(static_cast<std::size_t>(out));
  const double scale = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    const double lo = o * scale;
    const double hi = (o + 1) * scale;
    for (int i = static_cast<int>(std::floor(lo)); i < in && i < hi; ++i) {
      const double overlap = std::min<double>(hi, i + 1) - std::max<double>(lo, i);
      if (overlap > 0.0) {
        taps[o].push_back({i, overlap / scale});
      }
    }
  }
  return taps;
}

}  // namespace

DepthImage resize_area(const DepthImage& image, int width, int height) {
  if (image.width() == width && image.height() == height) {
    return image;
  }
  const auto col_taps = area_taps(image.width(), width);
  const auto row_taps = area_taps(image.height(), height);
  std::vector<double> horizontal(static_cast<std::size_t>(width) * image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (const Tap& t : col_taps[x]) {
        acc += t.weight * image.at(t.index, y);
      }
      horizontal[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  DepthImage out(width, height);
  out.camera_inside_terrain = image.camera_inside_terrain;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (const Tap& t : row_taps[y]) {
        acc += t.weight * horizontal[static_cast<std::size_t>(t.index) * width + x];
      }
      out.at(x, y) = static_cast<float>(acc);
    }
  }
  return out;
}

DepthImage postprocess(const DepthImage& raw, const CameraModel& camera) {
  if (raw.fully_invalid()) {
    DepthImage out(camera.out_width, camera.out_height, 0.0f, false);
    out.camera_inside_terrain = raw.camera_inside_terrain;
    return out;
  }
  DepthImage filled = fill_holes(raw);
  const float lo = static_cast<float>(camera.clip_min);
  const float hi = static_cast<float>(camera.clip_max);
  for (float& v : filled.depth()) {
    v = std::clamp(v, lo, hi);
  }
  DepthImage out = resize_area(filled, camera.out_width, camera.out_height);
  for (float& v : out.depth()) {
    v = std::clamp(v, lo, hi);
  }
  return out;
}

GroundFootprint footprint_check(const CameraModel& camera, const BasePose& pose, double ground_z) {
  const CameraFrame frame = camera_frame(pose, camera);
  const double w = camera.raw_width;
  const double h = camera.raw_height;
  const std::array<Eigen::Vector2d, 4> pixels{Eigen::Vector2d(0, 0), Eigen::Vector2d(w, 0), Eigen::Vector2d(w, h),
                                              Eigen::Vector2d(0, h)};
  const double c = std::cos(pose.yaw);
  const double s = std::sin(pose.yaw);
  GroundFootprint fp;
  fp.forward_min = fp.lateral_min = kInf;
  fp.forward_max = fp.lateral_max = -kInf;
  for (std::size_t k = 0; k < pixels.size(); ++k) {
    const Eigen::Vector3d dir = pixel_ray(frame, camera, pixels[k].x(), pixels[k].y(), camera.raw_width,
                                          camera.raw_height);
    Eigen::Vector2d local(kInf, 0.0);
    if (dir.z() < 0.0) {
      const double t = (frame.origin.z() - ground_z) / -dir.z();
      const Eigen::Vector3d hit = frame.origin + t * dir;
      const double dx = hit.x() - pose.position.x();
      const double dy = hit.y() - pose.position.y();
      local = {c * dx + s * dy, -s * dx + c * dy};
    }
    fp.corners[k] = local;
    fp.forward_min = std::min(fp.forward_min, local.x());
    fp.forward_max = std::max(fp.forward_max, local.x());
    fp.lateral_min = std::min(fp.lateral_min, local.y());
    fp.lateral_max = std::max(fp.lateral_max, local.y());
  }
  return fp;
}

}  // namespace terrasight
