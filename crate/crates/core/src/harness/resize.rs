use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral_mask::RgbImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResizeFilter {
    Nearest,
    Bilinear,
}

impl std::str::FromStr for ResizeFilter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "nearest" => Ok(Self::Nearest),
            "bilinear" => Ok(Self::Bilinear),
            other => Err(format!("unknown resize filter `{other}` (expected nearest or bilinear)")),
        }
    }
}

/// Parses `WxH`, e.g. `416x416`.
pub fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected WxH, got `{s}`"))?;
    let w: usize = w.trim().parse().map_err(|_| format!("bad width in `{s}`"))?;
    let h: usize = h.trim().parse().map_err(|_| format!("bad height in `{s}`"))?;
    if w == 0 || h == 0 {
        return Err(format!("size must be positive, got `{s}`"));
    }
    Ok((w, h))
}

/// Resamples to `width × height` using pixel-center alignment.
pub fn resize(image: &RgbImage, width: usize, height: usize, filter: ResizeFilter) -> Result<RgbImage> {
    if width == 0 || height == 0 {
        return Err(invalid("resize target must be positive"));
    }
    let (h, w) = image.dims();
    if (h, w) == (height, width) {
        return Ok(image.clone());
    }
    let sy = h as f64 / height as f64;
    let sx = w as f64 / width as f64;
    let out = match filter {
        ResizeFilter::Nearest => RgbImage::from_fn(height, width, |y, x| {
            let yy = (((y as f64 + 0.5) * sy) as usize).min(h - 1);
            let xx = (((x as f64 + 0.5) * sx) as usize).min(w - 1);
            image.get(yy, xx)
        }),
        ResizeFilter::Bilinear => RgbImage::from_fn(height, width, |y, x| {
            let fy = ((y as f64 + 0.5) * sy - 0.5).clamp(0.0, (h - 1) as f64);
            let fx = ((x as f64 + 0.5) * sx - 0.5).clamp(0.0, (w - 1) as f64);
            let (y0, x0) = (fy.floor() as usize, fx.floor() as usize);
            let (y1, x1) = ((y0 + 1).min(h - 1), (x0 + 1).min(w - 1));
            let (ty, tx) = (fy - y0 as f64, fx - x0 as f64);
            let (a, b, c, d) = (image.get(y0, x0), image.get(y0, x1), image.get(y1, x0), image.get(y1, x1));
            [0, 1, 2].map(|k| {
                let top = a[k] + (b[k] - a[k]) * tx;
                let bottom = c[k] + (d[k] - c[k]) * tx;
                top + (bottom - top) * ty
            })
        }),
    };
    Ok(out)
}
