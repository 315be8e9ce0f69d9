//! Property transforms: each maps an input image to a 28x28 image that
//! emphasizes one explainable property. `Identity` is the unexplainable flow
//! and passes the input through untouched.

pub mod binary;
pub mod harris;
pub mod shapes;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Image, SIDE};

use binary::{BinaryImage, Connectivity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyId {
    Stroke,
    Circle,
    Crossing,
    Ellipse,
    EllipseCircle,
    Endpoint,
    EnclosedRegion,
    Line,
    ConvexHull,
    Corner,
    Identity,
}

impl PropertyId {
    /// The ten explainable properties, in canonical flow order.
    pub const EXPLAINABLE: [PropertyId; 10] = [
        PropertyId::Stroke,
        PropertyId::Circle,
        PropertyId::Crossing,
        PropertyId::Ellipse,
        PropertyId::EllipseCircle,
        PropertyId::Endpoint,
        PropertyId::EnclosedRegion,
        PropertyId::Line,
        PropertyId::ConvexHull,
        PropertyId::Corner,
    ];

    pub const ALL: [PropertyId; 11] = [
        PropertyId::Stroke,
        PropertyId::Circle,
        PropertyId::Crossing,
        PropertyId::Ellipse,
        PropertyId::EllipseCircle,
        PropertyId::Endpoint,
        PropertyId::EnclosedRegion,
        PropertyId::Line,
        PropertyId::ConvexHull,
        PropertyId::Corner,
        PropertyId::Identity,
    ];

    pub fn is_explainable(self) -> bool {
        self != PropertyId::Identity
    }

    /// Identifier used in configs and on the command line.
    pub fn key(self) -> &'static str {
        match self {
            PropertyId::Stroke => "stroke",
            PropertyId::Circle => "circle",
            PropertyId::Crossing => "crossing",
            PropertyId::Ellipse => "ellipse",
            PropertyId::EllipseCircle => "ellipse_circle",
            PropertyId::Endpoint => "endpoint",
            PropertyId::EnclosedRegion => "enclosed_region",
            PropertyId::Line => "line",
            PropertyId::ConvexHull => "convex_hull",
            PropertyId::Corner => "corner",
            PropertyId::Identity => "identity",
        }
    }

    /// Wording used in rationale sentences.
    pub fn phrase(self) -> &'static str {
        match self {
            PropertyId::Stroke => "stroke",
            PropertyId::Circle => "circle",
            PropertyId::Crossing => "crossing",
            PropertyId::Ellipse => "ellipse",
            PropertyId::EllipseCircle => "ellipse-circle",
            PropertyId::Endpoint => "endpoint",
            PropertyId::EnclosedRegion => "enclosed region",
            PropertyId::Line => "line",
            PropertyId::ConvexHull => "convex hull",
            PropertyId::Corner => "corner",
            PropertyId::Identity => "no property",
        }
    }

    /// Short column label for tables.
    pub fn label(self) -> &'static str {
        match self {
            PropertyId::Stroke => "Stroke",
            PropertyId::Circle => "Circle",
            PropertyId::Crossing => "Crossing",
            PropertyId::Ellipse => "Ellipse",
            PropertyId::EllipseCircle => "Ell-Cir",
            PropertyId::Endpoint => "Endpoint",
            PropertyId::EnclosedRegion => "Encl. Reg.",
            PropertyId::Line => "Line",
            PropertyId::ConvexHull => "Convex Hull",
            PropertyId::Corner => "Corner",
            PropertyId::Identity => "No Property",
        }
    }
}

impl fmt::Display for PropertyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for PropertyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        PropertyId::ALL
            .into_iter()
            .find(|p| p.key() == norm)
            .or(match norm.as_str() {
                "ell_cir" => Some(PropertyId::EllipseCircle),
                "encl_reg" => Some(PropertyId::EnclosedRegion),
                "no_property" | "none" | "unexplainable" => Some(PropertyId::Identity),
                _ => None,
            })
            .ok_or_else(|| Error::UnknownProperty(s.to_string()))
    }
}

/// Every tunable constant the transforms use. Stored with each trained
/// knowledgebase so a model always travels with the transforms it saw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformParams {
    pub binarize_threshold: u8,
    /// Stroke: intensity added per pixel of distance to the background.
    pub stroke_intensity_per_px: f64,
    pub line_max_deviation: f64,
    pub line_min_length: usize,
    /// Circle/ellipse: mean radial fit error allowed, relative to the radius
    /// (semi-major axis for ellipses).
    pub conic_max_relative_error: f64,
    pub eccentricity_split: f64,
    pub conic_min_points: usize,
    pub conic_max_axis: f64,
    pub harris_k: f64,
    pub harris_relative_threshold: f64,
}

impl Default for TransformParams {
    fn default() -> Self {
        TransformParams {
            binarize_threshold: 128,
            stroke_intensity_per_px: 64.0,
            line_max_deviation: 1.0,
            line_min_length: 6,
            conic_max_relative_error: 0.15,
            eccentricity_split: 0.55,
            conic_min_points: 8,
            conic_max_axis: SIDE as f64 / 2.0,
            harris_k: 0.04,
            harris_relative_threshold: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ConicKind {
    Circle,
    Ellipse,
}

/// Classifies one point set as circle, ellipse, or neither.
fn classify_conic(points: &[(f64, f64)], params: &TransformParams) -> Option<ConicKind> {
    if points.len() < params.conic_min_points {
        return None;
    }
    let ellipse = shapes::fit_ellipse(points)?;
    if ellipse.semi_major > params.conic_max_axis {
        return None;
    }
    if ellipse.eccentricity >= params.eccentricity_split {
        (ellipse.mean_error <= params.conic_max_relative_error * ellipse.semi_major).then_some(ConicKind::Ellipse)
    } else {
        let circle = shapes::fit_circle(points)?;
        (circle.radius <= params.conic_max_axis
            && circle.mean_error <= params.conic_max_relative_error * circle.radius)
            .then_some(ConicKind::Circle)
    }
}

fn as_xy(mask: &BinaryImage) -> Vec<(f64, f64)> {
    mask.points().map(|(r, c)| (c as f64, r as f64)).collect()
}

/// Contours of the foreground components (fitted through their skeletons)
/// and of the enclosed holes that fit the requested conic kind.
fn conic_render(mask: &BinaryImage, skeleton: &BinaryImage, kind: ConicKind, params: &TransformParams) -> BinaryImage {
    let mut out = BinaryImage::empty();
    for component in binary::components(mask, Connectivity::Eight) {
        let mut skel_part = component.clone();
        for (o, &s) in skel_part.0.iter_mut().zip(skeleton.0.iter()) {
            *o &= s;
        }
        if classify_conic(&as_xy(&skel_part), params) == Some(kind) {
            out = out.union(&component.contour());
        }
    }
    let holes = binary::enclosed_regions(mask);
    for hole in binary::components(&holes, Connectivity::Four) {
        let rim = hole.contour();
        if classify_conic(&as_xy(&rim), params) == Some(kind) {
            out = out.union(&rim);
        }
    }
    out
}

/// Applies one property transform. `Identity` returns the input unchanged.
pub fn apply_transform(property: PropertyId, image: &Image, params: &TransformParams) -> Image {
    if property == PropertyId::Identity {
        return image.clone();
    }
    if property == PropertyId::Corner {
        return harris::corner_map(image, params.harris_k, params.harris_relative_threshold);
    }

    let mask = binary::binarize(image, params.binarize_threshold);
    match property {
        PropertyId::Stroke => {
            let dist = binary::distance_transform(&mask);
            let mut out = Image::zeros();
            for (o, d) in out.0.iter_mut().zip(dist) {
                *o = (d * params.stroke_intensity_per_px).round().clamp(0.0, 255.0) as u8;
            }
            out
        }
        PropertyId::EnclosedRegion => binary::enclosed_regions(&mask).to_image(),
        PropertyId::ConvexHull => shapes::hull_outline(&mask).to_image(),
        PropertyId::Endpoint => binary::endpoints(&binary::skeletonize(&mask)).dilate().to_image(),
        PropertyId::Crossing => binary::crossings(&binary::skeletonize(&mask)).dilate().to_image(),
        PropertyId::Line => {
            let skel = binary::skeletonize(&mask);
            shapes::line_segments(&skel, params.line_max_deviation, params.line_min_length).to_image()
        }
        PropertyId::Circle | PropertyId::Ellipse | PropertyId::EllipseCircle => {
            let skel = binary::skeletonize(&mask);
            let circle = || conic_render(&mask, &skel, ConicKind::Circle, params);
            let ellipse = || conic_render(&mask, &skel, ConicKind::Ellipse, params);
            match property {
                PropertyId::Circle => circle(),
                PropertyId::Ellipse => ellipse(),
                _ => circle().union(&ellipse()),
            }
            .to_image()
        }
        PropertyId::Identity | PropertyId::Corner => unreachable!("handled above"),
    }
}

/// Applies a transform named by string, as found in serialized configs.
pub fn apply_named(property: &str, image: &Image, params: &TransformParams) -> Result<Image> {
    Ok(apply_transform(property.parse()?, image, params))
}
