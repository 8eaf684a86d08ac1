#include <gtest/gtest.h>
#include <png.h>

#include <csetjmp>

#include "support.hpp"

using namespace damseg;
using namespace testsupport;

namespace {

struct Sink {
  std::vector<std::uint8_t> bytes;
};

void sink_write(png_structp png, png_bytep data, png_size_t n) {
  auto* s = static_cast<Sink*>(png_get_io_ptr(png));
  s->bytes.insert(s->bytes.end(), data, data + n);
}

// Indexed-colour PNG as produced by common annotation tools.
std::vector<std::uint8_t> indexed_png(int w, int h, const std::vector<std::uint8_t>& idx,
                                      int bit_depth) {
  Sink sink;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    ADD_FAILURE() << "png write failed";
    return {};
  }
  png_set_write_fn(png, &sink, sink_write, nullptr);
  png_set_IHDR(png, info, w, h, bit_depth, PNG_COLOR_TYPE_PALETTE, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_color palette[4] = {{0, 0, 0}, {255, 255, 255}, {255, 0, 0}, {0, 0, 255}};
  png_set_PLTE(png, info, palette, 4);
  png_write_info(png, info);
  png_set_packing(png);  // one index per byte in, packed on disk
  std::vector<std::uint8_t> row(static_cast<std::size_t>(w));
  for (int y = 0; y < h; ++y) {
    std::copy(idx.begin() + y * w, idx.begin() + (y + 1) * w, row.begin());
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return sink.bytes;
}

}  // namespace

TEST(Compose, EmptyInputsGiveBackground) {
  const TriLabel l = compose_trilabel(RoiMask(6, 4), EdgeMap(6, 4));
  EXPECT_EQ(l.class_counts()[0], 24u);
}

TEST(Compose, RoiWinsOverEdge) {
  RoiMask r(3, 3);
  EdgeMap e(3, 3);
  r.set(1, 1);
  e.set(1, 1);
  e.set(2, 2);
  const TriLabel l = compose_trilabel(r, e);
  EXPECT_EQ(l.at(1, 1), LabelClass::roi);
  EXPECT_EQ(l.at(2, 2), LabelClass::edge);
  EXPECT_EQ(l.at(0, 0), LabelClass::background);
}

TEST(Compose, HalfRoiAndEdgeLine) {
  const int w = 10, h = 6;
  RoiMask r(w, h);
  EdgeMap e(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w / 2; ++x) r.set(x, y);
    e.set(7, y);
  }
  const TriLabel l = compose_trilabel(r, e);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const LabelClass want = x < 5 ? LabelClass::roi : x == 7 ? LabelClass::edge : LabelClass::background;
      EXPECT_EQ(l.at(x, y), want);
    }
  const auto n = l.class_counts();
  EXPECT_EQ(n[2], 30u);
  EXPECT_EQ(n[1], 6u);
  EXPECT_EQ(n[0], 24u);
}

TEST(Compose, DimensionMismatchNamesBothShapes) {
  try {
    compose_trilabel(RoiMask(4, 5), EdgeMap(5, 4));
    FAIL();
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("4x5"), std::string::npos) << msg;
    EXPECT_NE(msg.find("5x4"), std::string::npos) << msg;
  }
}

TEST(Split, Examples) {
  const SplitLabel s = split_trilabel(TriLabel(5, 5));
  EXPECT_TRUE(s.roi.none());
  EXPECT_TRUE(s.edge.none());

  RoiMask r(4, 1);
  EdgeMap e(4, 1);
  r.set(0, 0);
  r.set(1, 0);
  e.set(1, 0);  // hidden under roi
  e.set(3, 0);
  const SplitLabel back = split_trilabel(compose_trilabel(r, e));
  EXPECT_EQ(back.roi, r);
  EdgeMap want(4, 1);
  want.set(3, 0);
  EXPECT_EQ(back.edge, want);
}

TEST(LabelProperty, ComposeSplitAlgebra) {
  for (int trial = 0; trial < 200; ++trial) {
    const int w = rand_int(1, 16), h = rand_int(1, 16);
    const RoiMask r = random_mask(w, h);
    const EdgeMap e = random_mask<EdgeMap>(w, h);
    const TriLabel l = compose_trilabel(r, e);
    const auto n = l.class_counts();
    EXPECT_EQ(n[0] + n[1] + n[2], static_cast<std::size_t>(w * h));
    const SplitLabel s = split_trilabel(l);
    EXPECT_EQ(s.roi, r);  // ROI survives intact
    for (std::size_t i = 0; i < s.edge.size(); ++i) EXPECT_EQ(s.edge.test(i), e.test(i) && !r.test(i));
    EXPECT_EQ(compose_trilabel(s.roi, s.edge), l);
    const TriLabel any = random_label(w, h);
    const SplitLabel t = split_trilabel(any);
    EXPECT_EQ(compose_trilabel(t.roi, t.edge), any);
  }
}

TEST(LabelPng, RoundTrip) {
  for (int trial = 0; trial < 20; ++trial) {
    const TriLabel l = random_label(rand_int(1, 30), rand_int(1, 30));
    EXPECT_EQ(decode_label_png(encode_label_png(l)), l);
  }
  const TriLabel full(224, 224, LabelClass::roi);
  const auto bytes = encode_label_png(full);
  const Raster raw = decode_png(bytes);
  EXPECT_TRUE(raw.is_gray());
  EXPECT_EQ(raw.width(), 224);
  for (auto v : raw.data()) ASSERT_EQ(v, 2);
  EXPECT_EQ(decode_label_png(bytes), full);
}

TEST(LabelPng, RejectsOutOfRangeValues) {
  Raster img(3, 2, 1);
  img.at(1, 1) = 3;
  img.at(2, 0) = 255;
  try {
    decode_label_png(encode_png(img));
    FAIL();
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("255"), std::string::npos) << msg;
  }
  EXPECT_THROW(decode_label_png(encode_png(Raster(2, 2, 3))), FormatError);
}

TEST(LabelPng, ReadsPaletteIndices) {
  const std::vector<std::uint8_t> idx{0, 1, 2, 2, 1, 0};
  for (int depth : {8, 4, 2}) {
    const TriLabel l = decode_label_png(indexed_png(3, 2, idx, depth));
    for (std::size_t i = 0; i < idx.size(); ++i) EXPECT_EQ(static_cast<int>(l.at_index(i)), idx[i]);
  }
  EXPECT_THROW(decode_label_png(indexed_png(2, 1, {0, 3}, 8)), FormatError);
  // The same file read as an image expands to colours.
  const Raster rgb = decode_png(indexed_png(3, 2, idx, 8));
  EXPECT_EQ(rgb.channels(), 3);
  EXPECT_EQ(rgb.at(2, 0, 0), 255);
  EXPECT_EQ(rgb.at(2, 0, 1), 0);
}

TEST(LabelPng, FileRoundTrip) {
  TempDir dir("labels");
  const TriLabel l = random_label(17, 9);
  write_label_png(dir / "sub/a.png", l);
  EXPECT_EQ(read_label_png(dir / "sub/a.png"), l);
  EXPECT_THROW(read_label_png(dir / "missing.png"), IoError);
}

TEST(Masks, RasterConversions) {
  const RoiMask m = random_mask(9, 7);
  const Raster r = mask_to_raster(m);
  for (auto v : r.data()) EXPECT_TRUE(v == 0 || v == 255);
  EXPECT_EQ(mask_from_raster<RoiMask>(r), m);
  Raster ones(2, 1, 1);
  ones.at(1, 0) = 1;
  EXPECT_TRUE(mask_from_raster<RoiMask>(ones).at(1, 0));
  EXPECT_EQ(resize_mask(m, 9, 7), m);
}
