#include "articulate/serialization.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "articulate/errors.hpp"
#include "articulate/observe.hpp"
#include "articulate/predict.hpp"
#include "json.hpp"

namespace articulate {

namespace {

using Json = nlohmann::ordered_json;

Json parse_json(const std::string& text, const std::string& context) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(context + ": " + e.what());
  }
}

const Json& field(const Json& obj, const char* name) {
  if (!obj.is_object() || !obj.contains(name))
    throw SchemaError(std::string("missing field '") + name + "'");
  return obj.at(name);
}

template <typename T>
T get_field(const Json& obj, const char* name) {
  try {
    return field(obj, name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(std::string("field '") + name +
                      "' has the wrong type");
  }
}

void check_version(const Json& obj) {
  const int v = get_field<int>(obj, "schema_version");
  if (v != kSchemaVersion)
    throw SchemaVersionMismatch("schema_version " + std::to_string(v) +
                                ", expected " +
                                std::to_string(kSchemaVersion));
}

Json vec3_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const Json& j, const char* name) {
  if (!j.is_array() || j.size() != 3)
    throw SchemaError(std::string("field '") + name +
                      "' is not a 3-vector");
  try {
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(std::string("field '") + name +
                      "' has non-numeric entries");
  }
}

Json mat3_json(const Mat3& m) {
  Json out = Json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.push_back(m(r, c));
  return out;
}

Mat3 mat3_from(const Json& j, const char* name) {
  if (!j.is_array() || j.size() != 9)
    throw SchemaError(std::string("field '") + name +
                      "' is not a row-major 3x3 matrix");
  Mat3 m;
  try {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) m(r, c) = j[3 * r + c].get<double>();
  } catch (const nlohmann::json::exception&) {
    throw SchemaError(std::string("field '") + name +
                      "' has non-numeric entries");
  }
  return m;
}

Json cloud_json(const PointCloud& pts) {
  Json out = Json::array();
  for (const Vec3& p : pts) out.push_back(vec3_json(p));
  return out;
}

PointCloud cloud_from(const Json& j, const char* name) {
  if (!j.is_array())
    throw SchemaError(std::string("field '") + name + "' is not an array");
  PointCloud out;
  out.reserve(j.size());
  for (const Json& p : j) out.push_back(vec3_from(p, name));
  return out;
}

Json transform_json(const SimilarityTransform& t) {
  Json out = Json::object();
  out["scale"] = t.scale;
  out["rotation"] = mat3_json(t.rotation);
  out["translation"] = vec3_json(t.translation);
  return out;
}

SimilarityTransform transform_from(const Json& j, const char* name) {
  if (!j.is_object())
    throw SchemaError(std::string("field '") + name + "' is not an object");
  SimilarityTransform t;
  t.scale = get_field<double>(j, "scale");
  t.rotation = mat3_from(field(j, "rotation"), "rotation");
  t.translation = vec3_from(field(j, "translation"), "translation");
  return t;
}

std::string joint_type_name(JointType t) {
  return t == JointType::revolute ? "revolute" : "prismatic";
}

JointType joint_type_from(const std::string& s) {
  if (s == "revolute") return JointType::revolute;
  if (s == "prismatic") return JointType::prismatic;
  throw SchemaError("unknown joint type '" + s + "'");
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

void finish_write(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

Json json_or_null(double v) {
  return std::isnan(v) ? Json(nullptr) : Json(v);
}

}  // namespace

void save_model(const KinematicModel& model, const std::string& path) {
  Json doc = Json::object();
  doc["schema_version"] = kSchemaVersion;
  doc["category_name"] = model.category_name;
  doc["root_part"] = model.root_part;
  Json parts = Json::array();
  for (const PartGeometry& part : model.parts) {
    Json p = Json::object();
    p["id"] = part.id;
    p["points"] = cloud_json(part.canonical_points);
    p["area_weights"] = part.canonical_area_weights;
    parts.push_back(std::move(p));
  }
  doc["parts"] = std::move(parts);
  Json joints = Json::array();
  for (const Joint& joint : model.joints) {
    Json j = Json::object();
    j["id"] = joint.id;
    j["type"] = joint_type_name(joint.type);
    j["parent"] = joint.parent_part;
    j["child"] = joint.child_part;
    j["axis"] = vec3_json(joint.axis_direction);
    j["pivot"] = joint.pivot ? vec3_json(*joint.pivot) : Json(nullptr);
    j["range"] = Json::array({joint.state_min, joint.state_max});
    j["rest_state"] = joint.rest_state;
    joints.push_back(std::move(j));
  }
  doc["joints"] = std::move(joints);

  std::ofstream out = open_out(path);
  out << doc.dump(2) << '\n';
  finish_write(out, path);
}

KinematicModel load_model(const std::string& path) {
  std::ifstream in = open_in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  const Json doc = parse_json(buf.str(), "model file");
  check_version(doc);

  KinematicModel model;
  model.category_name = get_field<std::string>(doc, "category_name");
  model.root_part = get_field<int>(doc, "root_part");
  for (const Json& p : field(doc, "parts")) {
    PartGeometry part;
    part.id = get_field<int>(p, "id");
    part.canonical_points = cloud_from(field(p, "points"), "points");
    part.canonical_area_weights =
        get_field<std::vector<double>>(p, "area_weights");
    if (part.canonical_area_weights.size() != part.canonical_points.size())
      throw LengthMismatch("part " + std::to_string(part.id) +
                           ": points and area_weights differ in length");
    model.parts.push_back(std::move(part));
  }
  for (const Json& j : field(doc, "joints")) {
    Joint joint;
    joint.id = get_field<int>(j, "id");
    joint.type = joint_type_from(get_field<std::string>(j, "type"));
    joint.parent_part = get_field<int>(j, "parent");
    joint.child_part = get_field<int>(j, "child");
    joint.axis_direction = vec3_from(field(j, "axis"), "axis");
    const Json& pivot = field(j, "pivot");
    if (!pivot.is_null()) joint.pivot = vec3_from(pivot, "pivot");
    const Json& range = field(j, "range");
    if (!range.is_array() || range.size() != 2)
      throw SchemaError("field 'range' is not a [lo, hi] pair");
    joint.state_min = range[0].get<double>();
    joint.state_max = range[1].get<double>();
    joint.rest_state = get_field<double>(j, "rest_state");
    model.joints.push_back(std::move(joint));
  }
  validate_model(model);
  return model;
}

namespace {

Json scene_json(const Scene& scene) {
  Json doc = Json::object();
  doc["scene_id"] = scene.scene_id;
  doc["model_ref"] = scene.model_ref;
  doc["joint_states"] = scene.joint_states;
  doc["camera"] = transform_json(scene.camera);
  doc["points"] = cloud_json(scene.points);
  doc["gt_part_labels"] = scene.gt_part_labels;
  doc["gt_npcs"] = cloud_json(scene.gt_npcs);
  Json gt_g = Json::array();
  for (const GTransform& g : scene.gt_g) {
    Json e = Json::object();
    e["scale"] = g.scale;
    e["offset"] = vec3_json(g.offset);
    gt_g.push_back(std::move(e));
  }
  doc["gt_g"] = std::move(gt_g);
  Json poses = Json::array();
  for (const SimilarityTransform& t : scene.gt_part_poses)
    poses.push_back(transform_json(t));
  doc["gt_part_poses"] = std::move(poses);
  const auto params_json = [](const Vec3& axis,
                              const std::optional<Vec3>& pivot) {
    Json e = Json::object();
    e["axis"] = vec3_json(axis);
    e["pivot"] = pivot ? vec3_json(*pivot) : Json(nullptr);
    return e;
  };
  Json naocs = Json::array();
  for (const JointParamsNaocs& p : scene.gt_joint_params_naocs)
    naocs.push_back(params_json(p.axis, p.pivot));
  doc["gt_joint_params_naocs"] = std::move(naocs);
  Json camera_params = Json::array();
  for (const JointParamsCamera& p : scene.gt_joint_params_camera)
    camera_params.push_back(params_json(p.axis, p.pivot));
  doc["gt_joint_params_camera"] = std::move(camera_params);
  doc["gt_joint_states"] = scene.gt_joint_states;
  doc["occlusion"] = scene.occlusion;
  doc["sampled_with_replacement"] = scene.sampled_with_replacement;
  return doc;
}

Scene scene_from(const Json& doc) {
  Scene scene;
  scene.scene_id = get_field<std::uint64_t>(doc, "scene_id");
  scene.model_ref = get_field<std::string>(doc, "model_ref");
  scene.joint_states = get_field<std::vector<double>>(doc, "joint_states");
  scene.camera = transform_from(field(doc, "camera"), "camera");
  scene.points = cloud_from(field(doc, "points"), "points");
  scene.gt_part_labels = get_field<std::vector<int>>(doc, "gt_part_labels");
  scene.gt_npcs = cloud_from(field(doc, "gt_npcs"), "gt_npcs");
  for (const Json& e : field(doc, "gt_g")) {
    GTransform g;
    g.scale = get_field<double>(e, "scale");
    g.offset = vec3_from(field(e, "offset"), "offset");
    scene.gt_g.push_back(g);
  }
  for (const Json& e : field(doc, "gt_part_poses"))
    scene.gt_part_poses.push_back(transform_from(e, "gt_part_poses"));
  for (const Json& e : field(doc, "gt_joint_params_naocs")) {
    JointParamsNaocs p;
    p.axis = vec3_from(field(e, "axis"), "axis");
    const Json& pivot = field(e, "pivot");
    if (!pivot.is_null()) p.pivot = vec3_from(pivot, "pivot");
    scene.gt_joint_params_naocs.push_back(p);
  }
  for (const Json& e : field(doc, "gt_joint_params_camera")) {
    JointParamsCamera p;
    p.axis = vec3_from(field(e, "axis"), "axis");
    const Json& pivot = field(e, "pivot");
    if (!pivot.is_null()) p.pivot = vec3_from(pivot, "pivot");
    scene.gt_joint_params_camera.push_back(p);
  }
  scene.gt_joint_states =
      get_field<std::vector<double>>(doc, "gt_joint_states");
  scene.occlusion = get_field<std::vector<double>>(doc, "occlusion");
  scene.sampled_with_replacement =
      get_field<bool>(doc, "sampled_with_replacement");

  const std::size_t n = scene.points.size();
  if (scene.gt_part_labels.size() != n || scene.gt_npcs.size() != n)
    throw LengthMismatch("per-point arrays differ in length");
  return scene;
}

}  // namespace

void write_dataset(const std::vector<Scene>& scenes,
                   const std::string& path) {
  std::ofstream out = open_out(path);
  Json header = Json::object();
  header["schema_version"] = kSchemaVersion;
  header["kind"] = "dataset";
  header["scene_count"] = scenes.size();
  out << header.dump() << '\n';
  for (const Scene& scene : scenes) out << scene_json(scene).dump() << '\n';
  finish_write(out, path);
}

std::vector<Scene> read_dataset(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw SchemaError("dataset file is empty");
  const Json header = parse_json(line, "dataset header");
  check_version(header);
  if (get_field<std::string>(header, "kind") != "dataset")
    throw SchemaError("file is not a dataset");

  std::vector<Scene> scenes;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    scenes.push_back(scene_from(
        parse_json(line, "dataset line " + std::to_string(line_no))));
  }
  return scenes;
}

void write_prediction(const PredictionRecord& pred, const std::string& path) {
  Json doc = Json::object();
  doc["schema_version"] = kSchemaVersion;
  doc["scene_id"] = pred.scene_id;
  doc["labels"] = pred.labels;
  doc["npcs"] = cloud_json(pred.npcs);
  doc["g_scale"] = pred.g_scale;
  doc["g_offset"] = cloud_json(pred.g_offset);
  doc["assoc"] = pred.assoc;
  Json votes = Json::array();
  for (const JointVote& v : pred.votes)
    votes.push_back(Json(std::vector<double>(v.begin(), v.end())));
  doc["votes"] = std::move(votes);

  std::ofstream out = open_out(path);
  out << doc.dump() << '\n';
  finish_write(out, path);
}

PredictionRecord load_prediction(const std::string& path) {
  std::ifstream in = open_in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  const Json doc = parse_json(buf.str(), "prediction file");
  check_version(doc);

  PredictionRecord pred;
  pred.scene_id = get_field<std::uint64_t>(doc, "scene_id");
  pred.labels = get_field<std::vector<int>>(doc, "labels");
  pred.npcs = cloud_from(field(doc, "npcs"), "npcs");
  pred.g_scale = get_field<std::vector<double>>(doc, "g_scale");
  pred.g_offset = cloud_from(field(doc, "g_offset"), "g_offset");
  pred.assoc = get_field<std::vector<int>>(doc, "assoc");
  for (const Json& v : field(doc, "votes")) {
    if (!v.is_array() || v.size() != 7)
      throw SchemaError("field 'votes' entries must have 7 components");
    JointVote vote;
    for (std::size_t d = 0; d < 7; ++d) {
      try {
        vote[d] = v[d].get<double>();
      } catch (const nlohmann::json::exception&) {
        throw SchemaError("field 'votes' has non-numeric entries");
      }
    }
    pred.votes.push_back(vote);
  }

  const std::size_t n = pred.labels.size();
  if (pred.npcs.size() != n || pred.g_scale.size() != n ||
      pred.g_offset.size() != n || pred.assoc.size() != n ||
      pred.votes.size() != n)
    throw LengthMismatch("prediction arrays differ in length");
  return pred;
}

namespace {

Json estimate_json(const EstimateRecord& record) {
  Json doc = Json::object();
  doc["scene_id"] = record.estimate.scene_id;
  doc["ok"] = record.ok;
  if (!record.ok) {
    doc["error"] = record.error;
    return doc;
  }
  const SceneEstimate& est = record.estimate;
  Json poses = Json::array();
  for (const SimilarityTransform& t : est.pose.poses)
    poses.push_back(transform_json(t));
  doc["poses"] = std::move(poses);
  Json inliers = Json::array();
  for (bool b : est.pose.inliers) inliers.push_back(b ? 1 : 0);
  doc["inliers"] = std::move(inliers);
  doc["energy"] = est.pose.energy;
  doc["iterations"] = est.pose.iterations;
  doc["converged"] = est.pose.converged;
  doc["has_joint_params"] = est.has_joint_params;
  Json joints = Json::array();
  for (const JointEstimate& je : est.joints) {
    Json j = Json::object();
    j["id"] = je.joint_id;
    j["axis"] = vec3_json(je.axis_camera);
    j["pivot"] = je.pivot_camera ? vec3_json(*je.pivot_camera) : Json(nullptr);
    j["state"] = je.state;
    joints.push_back(std::move(j));
  }
  doc["joints"] = std::move(joints);
  doc["has_boxes"] = est.has_boxes;
  if (est.has_boxes) {
    Json boxes = Json::array();
    for (const OrientedBox& b : est.boxes) {
      Json box = Json::object();
      box["center"] = vec3_json(b.center);
      box["rotation"] = mat3_json(b.rotation);
      box["half_extents"] = vec3_json(b.half_extents);
      boxes.push_back(std::move(box));
    }
    doc["boxes"] = std::move(boxes);
  } else {
    doc["boxes"] = nullptr;
  }
  return doc;
}

EstimateRecord estimate_from(const Json& doc, Method method) {
  EstimateRecord record;
  record.estimate.scene_id = get_field<std::uint64_t>(doc, "scene_id");
  record.estimate.method = method;
  record.ok = get_field<bool>(doc, "ok");
  if (!record.ok) {
    record.error = get_field<std::string>(doc, "error");
    return record;
  }
  SceneEstimate& est = record.estimate;
  for (const Json& t : field(doc, "poses"))
    est.pose.poses.push_back(transform_from(t, "poses"));
  for (const Json& b : field(doc, "inliers"))
    est.pose.inliers.push_back(b.get<int>() != 0);
  est.pose.energy = get_field<double>(doc, "energy");
  est.pose.iterations = get_field<int>(doc, "iterations");
  est.pose.converged = get_field<bool>(doc, "converged");
  est.has_joint_params = get_field<bool>(doc, "has_joint_params");
  for (const Json& j : field(doc, "joints")) {
    JointEstimate je;
    je.joint_id = get_field<int>(j, "id");
    je.axis_camera = vec3_from(field(j, "axis"), "axis");
    const Json& pivot = field(j, "pivot");
    if (!pivot.is_null()) je.pivot_camera = vec3_from(pivot, "pivot");
    je.state = get_field<double>(j, "state");
    est.joints.push_back(je);
  }
  est.has_boxes = get_field<bool>(doc, "has_boxes");
  if (est.has_boxes) {
    for (const Json& b : field(doc, "boxes")) {
      OrientedBox box;
      box.center = vec3_from(field(b, "center"), "center");
      box.rotation = mat3_from(field(b, "rotation"), "rotation");
      box.half_extents = vec3_from(field(b, "half_extents"), "half_extents");
      est.boxes.push_back(box);
    }
  }
  return record;
}

}  // namespace

void write_estimates(const EstimateFile& file, const std::string& path) {
  std::ofstream out = open_out(path);
  Json header = Json::object();
  header["schema_version"] = kSchemaVersion;
  header["kind"] = "estimates";
  header["method"] = method_to_string(file.method);
  out << header.dump() << '\n';
  for (const EstimateRecord& record : file.records)
    out << estimate_json(record).dump() << '\n';
  finish_write(out, path);
}

EstimateFile read_estimates(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line))
    throw SchemaError("estimates file is empty");
  const Json header = parse_json(line, "estimates header");
  check_version(header);
  if (get_field<std::string>(header, "kind") != "estimates")
    throw SchemaError("file is not an estimates file");

  EstimateFile file;
  file.method = method_from_string(get_field<std::string>(header, "method"));
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    file.records.push_back(estimate_from(
        parse_json(line, "estimates line " + std::to_string(line_no)),
        file.method));
  }
  return file;
}

namespace {

Json method_report_json(const MethodReport& r) {
  Json doc = Json::object();
  doc["method"] = method_to_string(r.method);
  doc["scene_count"] = r.scene_count;
  Json parts = Json::array();
  for (std::size_t j = 0; j < r.mean_rotation_deg.size(); ++j) {
    Json p = Json::object();
    p["mean_rotation_deg"] = json_or_null(r.mean_rotation_deg[j]);
    p["mean_translation"] = json_or_null(r.mean_translation[j]);
    p["mean_iou"] = json_or_null(r.mean_iou[j]);
    p["ad_fraction"] = json_or_null(r.ad_fraction[j]);
    parts.push_back(std::move(p));
  }
  doc["parts"] = std::move(parts);
  Json joints = Json::array();
  for (std::size_t k = 0; k < r.mean_state_error.size(); ++k) {
    Json j = Json::object();
    j["mean_state_error"] = json_or_null(r.mean_state_error[k]);
    j["mean_axis_deg"] = json_or_null(r.mean_axis_deg[k]);
    j["mean_pivot_distance"] = json_or_null(r.mean_pivot_distance[k]);
    joints.push_back(std::move(j));
  }
  doc["joints"] = std::move(joints);
  Json per_scene = Json::array();
  for (const SceneMetrics& sm : r.per_scene) {
    Json s = Json::object();
    const auto column = [](const std::vector<double>& v) {
      Json arr = Json::array();
      for (double x : v) arr.push_back(json_or_null(x));
      return arr;
    };
    s["rotation_error_deg"] = column(sm.rotation_error_deg);
    s["translation_error"] = column(sm.translation_error);
    s["iou_3d"] = column(sm.iou_3d);
    s["ad_value"] = column(sm.ad_value);
    s["part_diameter"] = column(sm.part_diameter);
    Json hits = Json::array();
    for (bool h : sm.ad_hit) hits.push_back(h);
    s["ad_hit"] = std::move(hits);
    s["state_error"] = column(sm.state_error);
    s["axis_angle_error_deg"] = column(sm.axis_angle_error_deg);
    s["pivot_line_distance"] = column(sm.pivot_line_distance);
    s["occlusion"] = column(sm.occlusion);
    per_scene.push_back(std::move(s));
  }
  doc["per_scene"] = std::move(per_scene);
  return doc;
}

}  // namespace

void write_report_json(const ComparisonReport& report,
                       const ReportExtras& extras, const std::string& path) {
  Json doc = Json::object();
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = "report";
  doc["master_seed"] = report.master_seed;
  if (!extras.config_json.empty())
    doc["config"] = parse_json(extras.config_json, "config echo");
  Json methods = Json::array();
  for (const MethodReport& r : report.methods)
    methods.push_back(method_report_json(r));
  doc["methods"] = std::move(methods);
  if (!extras.occlusion_bins.empty()) {
    Json bins = Json::array();
    for (const OcclusionBin& b : extras.occlusion_bins) {
      Json e = Json::object();
      e["lo"] = b.lo;
      e["hi"] = b.hi;
      e["count"] = b.count;
      e["mean_rotation_deg"] = json_or_null(b.mean_rotation_deg);
      e["mean_translation"] = json_or_null(b.mean_translation);
      bins.push_back(std::move(e));
    }
    doc["occlusion_bins"] = std::move(bins);
  }
  if (!extras.joint_voting.empty()) {
    Json rows = Json::array();
    for (const JointVotingRow& r : extras.joint_voting) {
      Json e = Json::object();
      e["joint_id"] = r.joint_id;
      e["canonical_axis_deg"] = json_or_null(r.canonical_axis_deg);
      e["canonical_pivot_distance"] =
          json_or_null(r.canonical_pivot_distance);
      e["direct_axis_deg"] = json_or_null(r.direct_axis_deg);
      e["direct_pivot_distance"] = json_or_null(r.direct_pivot_distance);
      rows.push_back(std::move(e));
    }
    doc["joint_voting"] = std::move(rows);
  }
  Json failures = Json::array();
  for (const FailureNote& f : extras.failures) {
    Json e = Json::object();
    e["scene_id"] = f.scene_id;
    e["message"] = f.message;
    failures.push_back(std::move(e));
  }
  doc["failures"] = std::move(failures);

  std::ofstream out = open_out(path);
  out << doc.dump(2) << '\n';
  finish_write(out, path);
}

void write_report_csv(const ComparisonReport& report,
                      const std::string& path) {
  std::ofstream out = open_out(path);
  out << "method,scope,index,scene_count,mean_rotation_deg,mean_translation,"
         "mean_iou,ad_fraction,mean_state_error,mean_axis_deg,"
         "mean_pivot_distance\n";
  const auto cell = [](double v) {
    if (std::isnan(v)) return std::string();
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
  };
  for (const MethodReport& r : report.methods) {
    const std::string name = method_to_string(r.method);
    for (std::size_t j = 0; j < r.mean_rotation_deg.size(); ++j)
      out << name << ",part," << j << ',' << r.scene_count << ','
          << cell(r.mean_rotation_deg[j]) << ','
          << cell(r.mean_translation[j]) << ',' << cell(r.mean_iou[j]) << ','
          << cell(r.ad_fraction[j]) << ",,,\n";
    for (std::size_t k = 0; k < r.mean_state_error.size(); ++k)
      out << name << ",joint," << k << ',' << r.scene_count << ",,,,,"
          << cell(r.mean_state_error[k]) << ',' << cell(r.mean_axis_deg[k])
          << ',' << cell(r.mean_pivot_distance[k]) << '\n';
  }
  finish_write(out, path);
}

}  // namespace articulate
