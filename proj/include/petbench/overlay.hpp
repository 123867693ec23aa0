#pragma once

// Offline overlay frames: ground truth and PET output drawn in stimulus
// coordinates, written as binary PPM images plus an index file.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "petbench/analysis.hpp"

namespace petbench {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

struct Image {
  int width = 0;
  int height = 0;
  std::vector<Rgb> pixels;

  Image(int w, int h, Rgb fill);
  Rgb at(int x, int y) const { return pixels[std::size_t(y) * width + x]; }
  void set(int x, int y, Rgb c);
};

void fill_rect(Image& img, const Box2D& r, Rgb c);
void outline_rect(Image& img, const Box2D& r, Rgb c, int thickness = 1);
/// Decimal digits in a 3x5 pixel font scaled by `scale`.
void draw_number(Image& img, int x, int y, long long value, Rgb c, int scale = 1);

std::string encode_ppm(const Image& img);

struct OverlayOptions {
  int stride = 1;     // render every stride-th aligned frame
  double scale = 1.0;  // output size relative to the stimulus
};

inline constexpr Rgb kBackground{48, 48, 48};
inline constexpr Rgb kTruthColor{255, 255, 255};
inline constexpr Rgb kSubjectColor{60, 200, 80};
inline constexpr Rgb kBystanderColor{230, 70, 60};
inline constexpr Rgb kObfuscatedFill{120, 120, 200};

Image render_overlay(const Scenario& s, std::int64_t t_ms, const FrameLogEntry* entry, const CornerCalibration& cal,
                     const OverlayOptions& opt = {});

/// Writes overlay_%06d.ppm per rendered stimulus frame and
/// overlay_index.csv (stimulus_frame,log_frame,elapsed_ms). Returns the
/// number of images written.
int render_overlays(const Scenario& s, const std::vector<std::pair<int, const FrameLogEntry*>>& aligned,
                    const CornerCalibration& cal, const std::filesystem::path& dir, const OverlayOptions& opt = {});

}  // namespace petbench
