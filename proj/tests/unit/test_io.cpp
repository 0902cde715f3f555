#include <gtest/gtest.h>

#include "bevtrack/io.hpp"

#include <sstream>

using namespace bevtrack;

namespace {

const char* kCalib = R"({
  "cameras": [{"id": "c0", "K": [1000,0,960, 0,1000,540, 0,0,1], "R": [1,0,0, 0,1,0, 0,0,1],
               "t": [0,0,5], "n": [0,0,1], "d_plane": 0}],
  "radars": [{"id": "r0", "yaw": 0.5, "origin": [1, 2]}],
  "bev_sensors": ["b0"]
})";

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::Numerical;
}

}  // namespace

TEST(Calibration, ParseAndIndex) {
  const Calibration c = parse_calibration(kCalib);
  ASSERT_EQ(c.sensor_count(), 3u);
  EXPECT_EQ(c.sensor_index("c0"), 0);
  EXPECT_EQ(c.sensor_index("r0"), 1);
  EXPECT_EQ(c.sensor_index("b0"), 2);
  EXPECT_DOUBLE_EQ(c.cameras[0].f_y, 1000.0);
  EXPECT_DOUBLE_EQ(c.radars[0].yaw, 0.5);
}

TEST(Calibration, UnknownSensorListsKnownIds) {
  const Calibration c = parse_calibration(kCalib);
  try {
    c.sensor_index("nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InputFormat);
    const std::string msg = e.what();
    EXPECT_NE(msg.find("c0"), std::string::npos);
    EXPECT_NE(msg.find("r0"), std::string::npos);
  }
}

TEST(Calibration, RoundTrip) {
  const Calibration a = parse_calibration(kCalib);
  const Calibration b = parse_calibration(calibration_to_json(a));
  EXPECT_EQ(a.sensor_names(), b.sensor_names());
  EXPECT_EQ(a.cameras[0].K, b.cameras[0].K);
  EXPECT_EQ(a.radars[0].origin, b.radars[0].origin);
}

TEST(Calibration, SingularIntrinsicsRejected) {
  const std::string bad = R"([{"id": "c0", "K": [0,0,0, 0,0,0, 0,0,1], "R": [1,0,0, 0,1,0, 0,0,1],
                               "t": [0,0,5], "n": [0,0,1], "d_plane": 0}])";
  EXPECT_EQ(kind_of([&] { parse_calibration(bad); }), ErrorKind::Calibration);
}

TEST(Detections, RoundTripEachKind) {
  DetectionRecord cam;
  cam.frame = 3;
  cam.sensor = "c0";
  cam.camera = {10, 20, 30, 120, 0.8, 0};
  cam.camera.feature = VecX::Unit(4, 1);
  cam.camera.depth_hint = DepthHint{7.5, true};
  DetectionRecord rad;
  rad.kind = DetectionKind::Radar;
  rad.sensor = "r0";
  rad.radar = {12, 0.1, -1.5, 3};
  rad.radar_yaw = 0.2;
  DetectionRecord bev;
  bev.kind = DetectionKind::Bev;
  bev.sensor = "b0";
  bev.bev.z = Vec2(1, 2);
  bev.bev.r_indep = 0.3 * Mat2::Identity();

  for (const auto& r : {cam, rad, bev}) {
    const DetectionRecord back = parse_detection(detection_to_json(r), 1);
    EXPECT_EQ(detection_to_json(back), detection_to_json(r));
  }
}

TEST(Detections, ErrorsCarryLineNumber) {
  try {
    parse_detection(R"({"frame": 0, "sensor": "c0", "kind": "camera"})", 17);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InputFormat);
    EXPECT_NE(std::string(e.what()).find("line 17"), std::string::npos);
  }
  EXPECT_EQ(kind_of([] { parse_detection("{not json", 2); }), ErrorKind::InputFormat);
  EXPECT_EQ(kind_of([] { parse_detection(R"({"frame": -1, "sensor": "a", "kind": "bev"})", 3); }),
            ErrorKind::InputFormat);
  EXPECT_EQ(kind_of([] { parse_detection(R"({"frame": 0, "sensor": "a", "kind": "lidar"})", 4); }),
            ErrorKind::InputFormat);
}

TEST(DetectionReader, GroupsFramesAndRejectsRegressions) {
  std::stringstream ok;
  ok << R"({"frame":0,"sensor":"b0","kind":"bev","z":[0,0],"R_indep":[1,0,0,1]})" << '\n'
     << R"({"frame":0,"sensor":"b0","kind":"bev","z":[1,0],"R_indep":[1,0,0,1]})" << '\n'
     << '\n'
     << R"({"frame":2,"sensor":"b0","kind":"bev","z":[2,0],"R_indep":[1,0,0,1]})" << '\n';
  DetectionReader reader(ok);
  auto a = reader.next_frame();
  ASSERT_TRUE(a);
  EXPECT_EQ(a->first, 0);
  EXPECT_EQ(a->second.size(), 2u);
  auto b = reader.next_frame();
  ASSERT_TRUE(b);
  EXPECT_EQ(b->first, 2);
  EXPECT_FALSE(reader.next_frame());

  std::stringstream bad;
  bad << R"({"frame":3,"sensor":"b0","kind":"bev","z":[0,0],"R_indep":[1,0,0,1]})" << '\n'
      << R"({"frame":1,"sensor":"b0","kind":"bev","z":[0,0],"R_indep":[1,0,0,1]})" << '\n';
  DetectionReader regress(bad);
  EXPECT_EQ(kind_of([&] {
              while (regress.next_frame()) {
              }
            }),
            ErrorKind::InputFormat);
}

TEST(GroundTruth, RoundTrip) {
  const ObjectRecord r{4, 9, Vec2(1.5, -2.25)};
  std::stringstream in(ground_truth_to_json(r) + "\n");
  const auto back = parse_ground_truth(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].frame, 4);
  EXPECT_EQ(back[0].id, 9);
  EXPECT_EQ(back[0].position, r.position);
}

TEST(Tracks, RoundTripKeepsCovariance) {
  TrackOutput t;
  t.frame = 5;
  t.id = 3;
  t.position = Vec2(1, 2);
  t.velocity = Vec2(0.5, 0);
  t.cov << 0.2, 0.01, 0.01, 0.3;
  std::stringstream in(track_to_json(t) + "\n");
  const auto back = parse_tracks(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].id, 3);
  ASSERT_TRUE(back[0].cov);
  EXPECT_EQ(*back[0].cov, t.cov);
  EXPECT_NE(track_to_json(t).find("\"mode\":\"cv\""), std::string::npos);
}
