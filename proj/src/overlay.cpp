#include "petbench/overlay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "petbench/errors.hpp"

namespace petbench {

Image::Image(int w, int h, Rgb fill) : width(w), height(h), pixels(std::size_t(w) * std::size_t(h), fill) {
  if (w <= 0 || h <= 0) throw ValidationError("image size must be positive");
}

void Image::set(int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= width || y >= height) return;
  pixels[std::size_t(y) * width + x] = c;
}

namespace {

struct PixelRect {
  int x0, y0, x1, y1;  // inclusive-exclusive
};

PixelRect to_pixels(const Image& img, const Box2D& r) {
  PixelRect p{int(std::lround(r.x)), int(std::lround(r.y)), int(std::lround(r.x + r.w)),
              int(std::lround(r.y + r.h))};
  p.x0 = std::clamp(p.x0, 0, img.width);
  p.x1 = std::clamp(p.x1, 0, img.width);
  p.y0 = std::clamp(p.y0, 0, img.height);
  p.y1 = std::clamp(p.y1, 0, img.height);
  return p;
}

// 3x5 glyphs, one row per 3-bit group, top row first.
constexpr std::uint16_t kDigits[10] = {
    0b111'101'101'101'111, 0b010'110'010'010'111, 0b111'001'111'100'111, 0b111'001'111'001'111,
    0b101'101'111'001'001, 0b111'100'111'001'111, 0b111'100'111'101'111, 0b111'001'010'010'010,
    0b111'101'111'101'111, 0b111'101'111'001'111};

Box2D scaled(const Box2D& b, double k) { return {b.x * k, b.y * k, b.w * k, b.h * k}; }

}  // namespace

void fill_rect(Image& img, const Box2D& r, Rgb c) {
  const PixelRect p = to_pixels(img, r);
  for (int y = p.y0; y < p.y1; ++y)
    for (int x = p.x0; x < p.x1; ++x) img.set(x, y, c);
}

void outline_rect(Image& img, const Box2D& r, Rgb c, int thickness) {
  const PixelRect p = to_pixels(img, r);
  if (p.x1 <= p.x0 || p.y1 <= p.y0) return;
  for (int t = 0; t < thickness; ++t) {
    for (int x = p.x0; x < p.x1; ++x) {
      img.set(x, p.y0 + t, c);
      img.set(x, p.y1 - 1 - t, c);
    }
    for (int y = p.y0; y < p.y1; ++y) {
      img.set(p.x0 + t, y, c);
      img.set(p.x1 - 1 - t, y, c);
    }
  }
}

void draw_number(Image& img, int x, int y, long long value, Rgb c, int scale) {
  const std::string digits = std::to_string(value);
  for (char ch : digits) {
    if (ch == '-') {
      for (int i = 0; i < 3 * scale; ++i)
        for (int j = 0; j < scale; ++j) img.set(x + i, y + 2 * scale + j, c);
    } else {
      const std::uint16_t g = kDigits[ch - '0'];
      for (int row = 0; row < 5; ++row)
        for (int col = 0; col < 3; ++col)
          if (g >> (14 - (row * 3 + col)) & 1)
            for (int i = 0; i < scale; ++i)
              for (int j = 0; j < scale; ++j) img.set(x + col * scale + i, y + row * scale + j, c);
    }
    x += 4 * scale;
  }
}

std::string encode_ppm(const Image& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.reserve(out.size() + img.pixels.size() * 3);
  for (const Rgb& p : img.pixels) {
    out.push_back(char(p.r));
    out.push_back(char(p.g));
    out.push_back(char(p.b));
  }
  return out;
}

Image render_overlay(const Scenario& s, std::int64_t t_ms, const FrameLogEntry* entry, const CornerCalibration& cal,
                     const OverlayOptions& opt) {
  if (!(opt.scale > 0)) throw ValidationError("overlay scale must be positive");
  const int w = std::max(1, int(std::lround(s.stimulus_size.width * opt.scale)));
  const int h = std::max(1, int(std::lround(s.stimulus_size.height * opt.scale)));
  const int glyph = std::max(1, int(std::lround(2 * opt.scale)));
  Image img(w, h, kBackground);

  if (entry) {
    for (const auto& row : entry->detection_rows) {
      const Box2D b = scaled(map_camera_to_stimulus(cal, row.box2d), opt.scale);
      if (row.obfuscated) fill_rect(img, b, kObfuscatedFill);
    }
    for (const auto& row : entry->detection_rows) {
      const Box2D b = scaled(map_camera_to_stimulus(cal, row.box2d), opt.scale);
      const Rgb c = row.label == FaceLabel::Subject ? kSubjectColor : kBystanderColor;
      outline_rect(img, b, c, 2);
      draw_number(img, int(std::lround(b.x)) + 3, int(std::lround(b.y + b.h)) - 6 * glyph, row.track_id, c, glyph);
    }
  }
  for (const auto& p : s.people) {
    auto box = sample_box(p, t_ms);
    if (!box) continue;
    const Box2D b = scaled(project(*box, s.stimulus_size), opt.scale);
    outline_rect(img, b, kTruthColor, 1);
    draw_number(img, int(std::lround(b.x)) + 2, int(std::lround(b.y)) + 2, p.person_id, kTruthColor, glyph);
  }
  return img;
}

int render_overlays(const Scenario& s, const std::vector<std::pair<int, const FrameLogEntry*>>& aligned,
                    const CornerCalibration& cal, const std::filesystem::path& dir, const OverlayOptions& opt) {
  if (aligned.empty()) throw ValidationError("nothing to render: no aligned frames");
  if (opt.stride < 1) throw ValidationError("overlay stride must be >= 1");
  std::filesystem::create_directories(dir);
  std::ostringstream index;
  index << "stimulus_frame,log_frame,elapsed_ms\n";
  int written = 0;
  for (std::size_t i = 0; i < aligned.size(); i += std::size_t(opt.stride)) {
    const auto& [k, entry] = aligned[i];
    const Image img = render_overlay(s, stimulus_frame_time_ms(s, k), entry, cal, opt);
    char name[32];
    std::snprintf(name, sizeof name, "overlay_%06d.ppm", k);
    write_file(dir / name, encode_ppm(img));
    index << k << "," << entry->frame << "," << entry->elapsed_ms << "\n";
    ++written;
  }
  write_file(dir / "overlay_index.csv", index.str());
  return written;
}

}  // namespace petbench
