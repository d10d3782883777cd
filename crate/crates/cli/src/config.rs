// A JSON run config is turned into the equivalent argument list so that it
// goes through exactly the same parsing and validation as the command line.
//
// {"command": "pe-wheel", "m": [2, 4], "n_mean": [100], "log_x": true}
//   -> pe-wheel --m 2,4 --n-mean 100 --log-x

use serde_json::Value;

pub fn config_to_args(text: &str) -> Result<Vec<String>, String> {
    let v: Value = serde_json::from_str(text).map_err(|e| format!("config is not valid JSON: {e}"))?;
    let obj = v.as_object().ok_or("config must be a JSON object")?;
    let command = obj
        .get("command")
        .and_then(Value::as_str)
        .ok_or("config needs a string field \"command\"")?;
    let mut args = vec![command.to_string()];
    for (key, val) in obj {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match val {
            Value::Bool(true) => args.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts = items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?;
                args.push(flag);
                args.push(parts.join(","));
            }
            other => {
                args.push(flag);
                args.push(scalar(other)?);
            }
        }
    }
    Ok(args)
}

fn scalar(v: &Value) -> Result<String, String> {
    match v {
        Value::Number(n) => Ok(n.to_string()),
        Value::String(s) => Ok(s.clone()),
        other => Err(format!("unsupported config value {other}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flattens_lists_and_flags() {
        let args = config_to_args(r#"{"command":"pe-wheel","m":[2,4],"n_mean":[100.5],"log_x":true,"tol":1e-14,"csv":"a.csv","quiet":false}"#).unwrap();
        assert_eq!(args[0], "pe-wheel");
        let joined = args.join(" ");
        assert!(joined.contains("--m 2,4"));
        assert!(joined.contains("--n-mean 100.5"));
        assert!(joined.contains("--log-x"));
        assert!(joined.contains("--csv a.csv"));
        assert!(!joined.contains("quiet"));
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(config_to_args("[1]").is_err());
        assert!(config_to_args("{}").is_err());
        assert!(config_to_args("{").is_err());
        assert!(config_to_args(r#"{"command":"x","m":{"a":1}}"#).is_err());
    }
}
