#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include <opencv2/imgcodecs.hpp>

#include "crackinspect/error.hpp"
#include "crackinspect/image_io.hpp"
#include "crackinspect/report.hpp"
#include "support.hpp"

using namespace crackinspect;
using testsupport::TempDir;

namespace {

namespace fs = std::filesystem;

CrackInstance make(const std::string& id, const std::string& image, double score,
                   TriageBucket bucket, std::size_t length, Orientation o,
                   Geometry g = Polygon({{1, 1}, {4, 1}, {4, 4}})) {
  CrackInstance c;
  c.id = id;
  c.image_id = image;
  c.label = "crack";
  c.geometry = std::move(g);
  c.score = score;
  c.bucket = bucket;
  c.orientation = o;
  c.length_px = length;
  return c;
}

ImageEntry entry(const std::string& id, const std::string& file, int w = 32, int h = 32) {
  ImageEntry e;
  e.record.id = id;
  e.record.path = "/nonexistent/" + file;
  e.record.width = w;
  e.record.height = h;
  e.status = ImageStatus::Ready;
  return e;
}

// Three confident (mean 93.6), two possible (mean 82.0), 185 px in total and
// a scale that turns 185 px into 164 cm.
ReviewSession golden_session() {
  ReviewSession s;
  s.session_id = "golden";
  auto e = entry("img-0001", "lab_00003.jpg");
  e.record.captured_at = "2022:03:31 16:21:40";
  e.record.cm_per_px = 164.0 / 185.0;
  s.images.push_back(e);
  const auto d = Orientation::DiagonalCrack;
  s.instances = {
      make("img-0001-i001", "img-0001", 95.0, TriageBucket::Confident, 60, d),
      make("img-0001-i002", "img-0001", 93.0, TriageBucket::Confident, 50, d),
      make("img-0001-i003", "img-0001", 92.8, TriageBucket::Confident, 40, d),
      make("img-0001-i004", "img-0001", 80.0, TriageBucket::Possible, 20, d),
      make("img-0001-i005", "img-0001", 84.0, TriageBucket::Possible, 15, d),
      make("img-0001-i006", "img-0001", 30.0, TriageBucket::Rejected, 99,
           Orientation::HorizontalCrack),
  };
  return s;
}

}  // namespace

TEST(Scale, Resolve) {
  EXPECT_EQ(resolve_scale(ExplicitCmPerPx{0.5}), 0.5);
  EXPECT_EQ(resolve_scale(ReferenceObject{{0, 0}, {100, 0}, 50}), 0.5);
  EXPECT_EQ(resolve_scale(CameraGeometry{3000, 6000}), 0.5);
  EXPECT_DOUBLE_EQ(resolve_scale(ReferenceObject{{0, 0}, {30, 40}, 10}), 0.2);
  EXPECT_THROW(resolve_scale(ExplicitCmPerPx{0}), Error);
  EXPECT_THROW(resolve_scale(ReferenceObject{{3, 3}, {3, 3}, 10}), Error);
  EXPECT_THROW(resolve_scale(ReferenceObject{{0, 0}, {3, 3}, -1}), Error);
  EXPECT_THROW(resolve_scale(CameraGeometry{0, 100}), Error);
  EXPECT_THROW(resolve_scale(CameraGeometry{100, 0}), Error);
}

TEST(Scale, ToCm) {
  EXPECT_EQ(to_cm(100, 0.5), 50);
  EXPECT_EQ(to_cm(0, 123.4), 0);
  EXPECT_EQ(to_cm(365, 0.5), 183);
  EXPECT_EQ(to_cm(185, 164.0 / 185.0), 164);
}

TEST(Report, HeaderIsExact) {
  EXPECT_EQ(render_report_csv({}),
            "Filename,Date/Time Taken,Crack Types,No. of Confident Cracks,Average Confidence "
            "Score for Confident Cracks,No. of Possible Cracks,Average Confidence Score for "
            "Possible Cracks,Total Crack Length (pixels),Estimate Total Length (cm)\n");
}

TEST(Report, GoldenRow) {
  const auto rows = build_report(golden_session());
  ASSERT_EQ(rows.size(), 1U);
  EXPECT_EQ(format_report_row(rows[0]),
            "lab_00003.jpg,2022:03:31 16:21:40,'Diagonal Crack',3,93.6,2,82.0,185,164");
}

TEST(Report, RejectingAConfidentInstanceShrinksTheRow) {
  auto s = golden_session();
  const auto before = build_report(s)[0];
  s.find_instance("img-0001-i001")->decision = Decision::RejectedByOperator;
  const auto after = build_report(s)[0];
  EXPECT_LT(after.confident_count, before.confident_count);
  EXPECT_LT(after.total_length_px, before.total_length_px);
  EXPECT_LT(*after.confident_avg_score, *before.confident_avg_score);
  EXPECT_EQ(format_report_row(after),
            "lab_00003.jpg,2022:03:31 16:21:40,'Diagonal Crack',2,92.9,2,82.0,125,111");
}

TEST(Report, RejectionIsMonotone) {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> score(0, 100);
  std::uniform_int_distribution<int> len(0, 200);
  std::uniform_int_distribution<int> orient(0, 2);
  const TriageThresholds th;
  for (int t = 0; t < 50; ++t) {
    ReviewSession s;
    s.images.push_back(entry("img-0001", "a.jpg"));
    for (int k = 0; k < 8; ++k) {
      const double sc = score(rng);
      s.instances.push_back(make("i" + std::to_string(k), "img-0001", sc, triage(sc, th),
                                 static_cast<std::size_t>(len(rng)),
                                 static_cast<Orientation>(orient(rng))));
    }
    auto prev = build_report(s)[0];
    std::vector<std::size_t> order(8);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (auto k : order) {
      s.instances[k].decision = Decision::RejectedByOperator;
      const auto now = build_report(s)[0];
      EXPECT_LE(now.confident_count, prev.confident_count);
      EXPECT_LE(now.possible_count, prev.possible_count);
      EXPECT_LE(now.total_length_px, prev.total_length_px);
      EXPECT_TRUE(std::includes(prev.crack_types.begin(), prev.crack_types.end(),
                                now.crack_types.begin(), now.crack_types.end()));
      prev = now;
    }
    EXPECT_EQ(prev.confident_count + prev.possible_count, 0U);
    EXPECT_FALSE(prev.confident_avg_score.has_value());
  }
}

TEST(Report, CrackTypesAndEmptyImages) {
  ReviewSession s;
  s.images.push_back(entry("img-0001", "lab_00011.jpg"));
  s.images.push_back(entry("img-0002", "empty.jpg"));
  auto failed = entry("img-0003", "broken.jpg");
  failed.status = ImageStatus::Failed;
  s.images.push_back(failed);
  s.instances = {
      make("a", "img-0001", 90, TriageBucket::Confident, 10, Orientation::HorizontalCrack),
      make("b", "img-0001", 70, TriageBucket::Possible, 5, Orientation::DiagonalCrack),
  };
  const auto rows = build_report(s);
  ASSERT_EQ(rows.size(), 2U);
  EXPECT_EQ(format_crack_types(rows[0].crack_types), "'Diagonal Crack', 'Horizontal Crack'");
  // Commas inside the type list force RFC 4180 quoting.
  EXPECT_EQ(format_report_row(rows[0]),
            "lab_00011.jpg,,\"'Diagonal Crack', 'Horizontal Crack'\",1,90.0,1,70.0,15,");
  EXPECT_EQ(format_report_row(rows[1]), "empty.jpg,,,0,,0,,0,");
  EXPECT_EQ(format_crack_types({}), "");
}

TEST(Report, DeterministicBytes) {
  const auto a = render_report_csv(build_report(golden_session()));
  const auto b = render_report_csv(build_report(golden_session()));
  EXPECT_EQ(a, b);
}

TEST(Outputs, EmptySession) {
  TempDir dir;
  ReviewSession s;
  s.session_id = "empty";
  EXPECT_EQ(write_outputs(s, dir.path()), 0U);
  EXPECT_TRUE(fs::is_directory(dir / "Confident"));
  EXPECT_TRUE(fs::is_directory(dir / "Possible"));
  EXPECT_TRUE(fs::is_empty(dir / "Confident"));
  EXPECT_TRUE(fs::is_empty(dir / "Possible"));
  EXPECT_EQ(testsupport::read_text(dir / "report.csv"), std::string(kReportHeader) + "\n");
  EXPECT_TRUE(fs::exists(dir / "session.json"));
}

TEST(Outputs, BucketRouting) {
  TempDir dir;
  TempDir images;
  testsupport::write_gray_image(images / "one.jpg", 32, 32, 90);
  ReviewSession s;
  auto e1 = entry("img-0001", "one.jpg");
  e1.record.path = images / "one.jpg";
  s.images.push_back(e1);
  s.images.push_back(entry("img-0002", "two.jpg"));
  s.instances = {
      make("a", "img-0001", 90, TriageBucket::Confident, 3, Orientation::DiagonalCrack),
      make("b", "img-0002", 90, TriageBucket::Confident, 3, Orientation::DiagonalCrack,
           Polygon({{10, 10}, {20, 10}, {20, 20}})),
      make("c", "img-0002", 70, TriageBucket::Possible, 3, Orientation::DiagonalCrack),
  };
  EXPECT_EQ(write_outputs(s, dir.path()), 2U);
  EXPECT_TRUE(fs::exists(dir / "Confident" / "one_overlay.png"));
  EXPECT_TRUE(fs::exists(dir / "Confident" / "one_mask.png"));
  EXPECT_FALSE(fs::exists(dir / "Possible" / "one_overlay.png"));
  EXPECT_TRUE(fs::exists(dir / "Confident" / "two_overlay.png"));
  EXPECT_TRUE(fs::exists(dir / "Possible" / "two_overlay.png"));
  const auto mask = read_mask_png(dir / "Possible" / "two_mask.png");
  EXPECT_EQ(mask, instance_mask(s.instances[2].geometry, 32, 32));
  const auto overlay = cv::imread((dir / "Confident" / "one_overlay.png").string());
  EXPECT_EQ(overlay.cols, 32);
  EXPECT_EQ(overlay.rows, 32);

  // Rejecting the only confident instance on image one empties its folder entry.
  TempDir again;
  s.find_instance("a")->decision = Decision::RejectedByOperator;
  write_outputs(s, again.path());
  EXPECT_FALSE(fs::exists(again / "Confident" / "one_overlay.png"));
}
